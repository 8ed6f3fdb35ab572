#include "pmh/noise.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <iostream>

#include "pmh/errors.hpp"
#include "pmh/ou.hpp"

namespace pmh {

namespace {

ComplexMatrix cholesky_or_throw(const ComplexMatrix& m, const char* what) {
  Eigen::LLT<ComplexMatrix> llt(m);
  if (llt.info() != Eigen::Success)
    throw CholeskyFailure(std::string(what) + " covariance is numerically indefinite");
  return llt.matrixL();
}

}  // namespace

OUNoiseGenerator::OUNoiseGenerator(const PositiveParametrization& p, double dt) : dt_(dt) {
  if (!(dt > 0.0)) throw Error("noise step must be positive");
  if (!certify_positivity(amplitudes_from_residues(p)).is_physical)
    throw NotPhysical("noise generation requires a physical parametrization");
  const OUModel ou = build_diagonal_ou(p);
  const int n = p.size();
  double max_rate = 0.0;
  decay_ = ComplexVector(n);
  for (int j = 0; j < n; ++j) {
    decay_(j) = std::exp(-p.lambdas(j) * dt);
    max_rate = std::max(max_rate, std::abs(p.lambdas(j)));
  }
  if (dt * max_rate > 0.1)
    std::cerr << "[pmh] warning: noise step dt*max|lambda| = " << dt * max_rate
              << " > 0.1; correlation sampling will be coarse\n";
  coupling_ = ou.coupling;

  const ComplexVector c = ou.diffusion.col(0);
  ComplexMatrix stationary(n, n), increment(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      const Complex denom = p.lambdas(j) + std::conj(p.lambdas(k));
      const Complex cc = c(j) * std::conj(c(k));
      stationary(j, k) = cc / denom;
      increment(j, k) = cc * (1.0 - std::exp(-denom * dt)) / denom;
    }
  stationary_chol_ = cholesky_or_throw(stationary, "stationary");
  increment_chol_ = cholesky_or_throw(increment, "step-increment");
}

NoisePath OUNoiseGenerator::sample(int n_steps, std::uint64_t seed,
                                   std::uint64_t stream) const {
  const int n = n_components();
  RngStream rng(seed, stream);
  ComplexVector white(n), z(n);

  NoisePath path;
  path.dt = dt_;
  path.seed = seed;
  path.stream = stream;
  path.generator = "exact-ou/mt19937_64/box-muller";
  path.samples.resize(n_steps + 1);

  for (int j = 0; j < n; ++j) white(j) = rng.complex_gaussian();
  z = stationary_chol_ * white;
  path.samples[0] = std::conj(coupling_.dot(z));  // conj(sum_j gt_j^* z_j)

  for (int step = 1; step <= n_steps; ++step) {
    for (int j = 0; j < n; ++j) white(j) = rng.complex_gaussian();
    z = decay_.cwiseProduct(z) + increment_chol_ * white;
    path.samples[step] = std::conj(coupling_.dot(z));
  }
  return path;
}

NoisePath generate_noise(const PositiveParametrization& p, double dt, int n_steps,
                         std::uint64_t seed, std::uint64_t stream) {
  return OUNoiseGenerator(p, dt).sample(n_steps, seed, stream);
}

}  // namespace pmh

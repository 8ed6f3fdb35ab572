#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pmh/bcf.hpp"
#include "pmh/rng.hpp"
#include "pmh/types.hpp"

namespace pmh {

// Discretized conjugated driving process z_t^* with exponential correlation
// E[z_t z_s^*] = sum_k G_k exp(-lambda_k (t-s)), plus RNG provenance.
struct NoisePath {
  double dt = 0.0;
  std::vector<Complex> samples;  // z^*(k dt), k = 0..n_steps
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::string generator;

  Complex value(int k) const { return samples[k]; }
};

// Samples the N scalar OU components z_j' = -lambda_j z_j + c_j xi(t) driven
// by one shared complex white noise, using the exact discrete-time update:
// exponential decay plus an increment drawn from the exactly integrated noise
// covariance. Initial conditions are stationary, drawn through the Cholesky
// factor of P_jk = c_j c_k^* / (lambda_j + lambda_k^*).
class OUNoiseGenerator {
 public:
  // Throws NotPhysical when the derived amplitudes fail certification and
  // CholeskyFailure when a covariance is numerically indefinite.
  OUNoiseGenerator(const PositiveParametrization& p, double dt);

  NoisePath sample(int n_steps, std::uint64_t seed, std::uint64_t stream) const;

  double dt() const { return dt_; }
  int n_components() const { return static_cast<int>(decay_.size()); }

 private:
  double dt_ = 0.0;
  ComplexVector decay_;            // exp(-lambda_j dt)
  ComplexVector coupling_;         // g-tilde
  ComplexMatrix stationary_chol_;  // L with L L^+ = P
  ComplexMatrix increment_chol_;   // L with L L^+ = step covariance
};

NoisePath generate_noise(const PositiveParametrization& p, double dt, int n_steps,
                         std::uint64_t seed, std::uint64_t stream);

}  // namespace pmh

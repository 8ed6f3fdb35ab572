#include "pmh/fit.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "pmh/errors.hpp"
#include "pmh/levmar.hpp"
#include "pmh/rng.hpp"

namespace pmh {

void BCFSamples::validate() const {
  if (taus.size() != values.size()) throw ShapeMismatch("taus and values must match");
  if (taus.size() == 0) throw Error("samples must be non-empty");
  if (taus(0) < 0.0) throw Error("sample times must start at tau >= 0");
  for (int i = 1; i < size(); ++i)
    if (!(taus(i) > taus(i - 1))) throw Error("sample times must be strictly increasing");
  if (weights.size() != 0) {
    if (weights.size() != taus.size()) throw ShapeMismatch("weights must match the samples");
    for (int i = 0; i < size(); ++i)
      if (!(weights(i) > 0.0)) throw Error("weights must be positive");
  }
}

BCFSamples sample_bcf(const ExponentialBCF& bcf, const RealVector& taus) {
  BCFSamples samples;
  samples.taus = taus;
  samples.values = ComplexVector(taus.size());
  for (int i = 0; i < taus.size(); ++i) samples.values(i) = eval_bcf(bcf, taus(i));
  return samples;
}

namespace {

RealVector effective_sqrt_weights(const BCFSamples& samples, const FitConfig& config) {
  RealVector w = samples.weights.size() ? samples.weights
                                        : RealVector::Ones(samples.size());
  if (config.tail_weight_rate != 0.0)
    for (int i = 0; i < samples.size(); ++i)
      w(i) *= std::exp(-config.tail_weight_rate * samples.taus(i));
  return w.cwiseSqrt();
}

// ---------------------------------------------------------------------------
// parameter packing

ComplexVector unpack_rates(const RealVector& x, int n, int offset) {
  ComplexVector lambdas(n);
  for (int j = 0; j < n; ++j)
    lambdas(j) = Complex(std::exp(x(offset + 2 * j)), x(offset + 2 * j + 1));
  return lambdas;
}

void pack_rates(const ComplexVector& lambdas, RealVector& x, int offset) {
  for (int j = 0; j < lambdas.size(); ++j) {
    x(offset + 2 * j) = std::log(std::max(lambdas(j).real(), 1e-12));
    x(offset + 2 * j + 1) = lambdas(j).imag();
  }
}

// physical ansatz: x = [Re r_j, Im r_j]_j + [u_j, w_j]_j  (4N)
ComplexVector unpack_residues(const RealVector& x, int n) {
  ComplexVector r(n);
  for (int j = 0; j < n; ++j) r(j) = Complex(x(2 * j), x(2 * j + 1));
  return r;
}

// direct ansatz: x = [Re G_j]_j + [Im G_j]_{j<N-1} + [u_j, w_j]_j  (4N-1)
ComplexVector unpack_amplitudes(const RealVector& x, int n) {
  ComplexVector g(n);
  double im_last = 0.0;
  for (int j = 0; j < n - 1; ++j) im_last -= x(n + j);
  for (int j = 0; j < n; ++j)
    g(j) = Complex(x(j), j < n - 1 ? x(n + j) : im_last);
  return g;
}

// ---------------------------------------------------------------------------
// residual models

struct PhysicalModel {
  const BCFSamples* samples;
  RealVector sqrt_w;
  int n;

  int n_params() const { return 4 * n; }

  void operator()(const RealVector& x, RealVector& residuals, RealMatrix* jacobian) const {
    const int m = samples->size();
    const ComplexVector r = unpack_residues(x, n);
    const ComplexVector lambdas = unpack_rates(x, n, 2 * n);
    residuals.resize(2 * m);
    if (jacobian) jacobian->resize(2 * m, n_params());

    ComplexMatrix inv_d(n, n);  // 1 / (lambda_j + conj(lambda_k))
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        inv_d(j, k) = 1.0 / (lambdas(j) + std::conj(lambdas(k)));

    ComplexVector row_sum(n);  // A_j = sum_k conj(r_k) / D_jk
    for (int j = 0; j < n; ++j) {
      Complex acc = 0.0;
      for (int k = 0; k < n; ++k) acc += std::conj(r(k)) * inv_d(j, k);
      row_sum(j) = acc;
    }

    ComplexVector decay(n);
    for (int i = 0; i < m; ++i) {
      const double tau = samples->taus(i);
      for (int j = 0; j < n; ++j) decay(j) = std::exp(-lambdas(j) * tau);
      Complex alpha = 0.0;
      for (int j = 0; j < n; ++j) alpha += decay(j) * r(j) * row_sum(j);
      const Complex diff = sqrt_w(i) * (alpha - samples->values(i));
      residuals(2 * i) = diff.real();
      residuals(2 * i + 1) = diff.imag();
      if (!jacobian) continue;

      for (int p = 0; p < n; ++p) {
        const Complex d_r = decay(p) * row_sum(p);  // d alpha / d r_p
        Complex d_rconj = 0.0;                      // d alpha / d conj(r_p)
        Complex d_lam = 0.0;                        // d alpha / d lambda_p
        Complex d_lamconj = 0.0;                    // d alpha / d conj(lambda_p)
        for (int j = 0; j < n; ++j) {
          d_rconj += decay(j) * r(j) * inv_d(j, p);
          d_lamconj -= decay(j) * r(j) * std::conj(r(p)) * inv_d(j, p) * inv_d(j, p);
        }
        for (int k = 0; k < n; ++k)
          d_lam -= r(p) * std::conj(r(k)) * inv_d(p, k) * (tau + inv_d(p, k));
        d_lam *= decay(p);

        const Complex d_re_r = d_r + d_rconj;
        const Complex d_im_r = kImag * (d_r - d_rconj);
        const Complex d_u = lambdas(p).real() * (d_lam + d_lamconj);
        const Complex d_w = kImag * (d_lam - d_lamconj);
        const double w_i = sqrt_w(i);
        (*jacobian)(2 * i, 2 * p) = w_i * d_re_r.real();
        (*jacobian)(2 * i + 1, 2 * p) = w_i * d_re_r.imag();
        (*jacobian)(2 * i, 2 * p + 1) = w_i * d_im_r.real();
        (*jacobian)(2 * i + 1, 2 * p + 1) = w_i * d_im_r.imag();
        (*jacobian)(2 * i, 2 * n + 2 * p) = w_i * d_u.real();
        (*jacobian)(2 * i + 1, 2 * n + 2 * p) = w_i * d_u.imag();
        (*jacobian)(2 * i, 2 * n + 2 * p + 1) = w_i * d_w.real();
        (*jacobian)(2 * i + 1, 2 * n + 2 * p + 1) = w_i * d_w.imag();
      }
    }
  }
};

struct DirectModel {
  const BCFSamples* samples;
  RealVector sqrt_w;
  int n;

  int n_params() const { return 4 * n - 1; }
  int rate_offset() const { return 2 * n - 1; }

  void operator()(const RealVector& x, RealVector& residuals, RealMatrix* jacobian) const {
    const int m = samples->size();
    const ComplexVector g = unpack_amplitudes(x, n);
    const ComplexVector lambdas = unpack_rates(x, n, rate_offset());
    residuals.resize(2 * m);
    if (jacobian) jacobian->resize(2 * m, n_params());

    ComplexVector decay(n);
    for (int i = 0; i < m; ++i) {
      const double tau = samples->taus(i);
      for (int j = 0; j < n; ++j) decay(j) = std::exp(-lambdas(j) * tau);
      Complex alpha = 0.0;
      for (int j = 0; j < n; ++j) alpha += g(j) * decay(j);
      const Complex diff = sqrt_w(i) * (alpha - samples->values(i));
      residuals(2 * i) = diff.real();
      residuals(2 * i + 1) = diff.imag();
      if (!jacobian) continue;

      const double w_i = sqrt_w(i);
      for (int p = 0; p < n; ++p) {
        (*jacobian)(2 * i, p) = w_i * decay(p).real();
        (*jacobian)(2 * i + 1, p) = w_i * decay(p).imag();
        if (p < n - 1) {
          const Complex d_im = kImag * (decay(p) - decay(n - 1));
          (*jacobian)(2 * i, n + p) = w_i * d_im.real();
          (*jacobian)(2 * i + 1, n + p) = w_i * d_im.imag();
        }
        const Complex d_lam = -tau * g(p) * decay(p);
        const Complex d_u = lambdas(p).real() * d_lam;
        const Complex d_w = kImag * d_lam;
        (*jacobian)(2 * i, rate_offset() + 2 * p) = w_i * d_u.real();
        (*jacobian)(2 * i + 1, rate_offset() + 2 * p) = w_i * d_u.imag();
        (*jacobian)(2 * i, rate_offset() + 2 * p + 1) = w_i * d_w.real();
        (*jacobian)(2 * i + 1, rate_offset() + 2 * p + 1) = w_i * d_w.imag();
      }
    }
  }
};

// ---------------------------------------------------------------------------
// initialization

// Hermiticity-constrained linear least squares for G at fixed rates.
ComplexVector amplitudes_least_squares(const BCFSamples& samples, const RealVector& sqrt_w,
                                       const ComplexVector& lambdas) {
  const int m = samples.size();
  const int n = static_cast<int>(lambdas.size());
  RealMatrix design(2 * m, 2 * n - 1);
  RealVector target(2 * m);
  for (int i = 0; i < m; ++i) {
    const double tau = samples.taus(i);
    const double w_i = sqrt_w(i);
    for (int j = 0; j < n; ++j) {
      const Complex e = std::exp(-lambdas(j) * tau);
      design(2 * i, j) = w_i * e.real();
      design(2 * i + 1, j) = w_i * e.imag();
      if (j < n - 1) {
        const Complex e_last = std::exp(-lambdas(n - 1) * tau);
        const Complex d_im = kImag * (e - e_last);
        design(2 * i, n + j) = w_i * d_im.real();
        design(2 * i + 1, n + j) = w_i * d_im.imag();
      }
    }
    target(2 * i) = w_i * samples.values(i).real();
    target(2 * i + 1) = w_i * samples.values(i).imag();
  }
  const RealVector theta = design.colPivHouseholderQr().solve(target);
  RealVector padded(2 * n - 1 + 2 * n);
  padded.head(2 * n - 1) = theta;
  return unpack_amplitudes(padded, n);
}

// Crude discrete spectrum of the samples; returns the n strongest frequencies.
std::vector<double> dominant_frequencies(const BCFSamples& samples, int n) {
  const int m = samples.size();
  const double span = samples.taus(m - 1) - samples.taus(0);
  if (span <= 0.0) return std::vector<double>(n, 0.0);
  const int n_freq = 256;
  const double freq_max = std::numbers::pi * m / span;
  std::vector<std::pair<double, double>> power(n_freq);
  for (int q = 0; q < n_freq; ++q) {
    const double omega = -freq_max + 2.0 * freq_max * q / (n_freq - 1);
    Complex acc = 0.0;
    for (int i = 0; i < m; ++i)
      acc += samples.values(i) * std::exp(Complex(0.0, omega * samples.taus(i)));
    power[q] = {std::norm(acc), omega};
  }
  std::sort(power.begin(), power.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<double> peaks;
  for (const auto& [strength, omega] : power) {
    bool close = false;
    for (double seen : peaks)
      if (std::abs(seen - omega) < 0.5 * freq_max / n_freq * 8) close = true;
    if (!close) peaks.push_back(omega);
    if (static_cast<int>(peaks.size()) == n) break;
  }
  while (static_cast<int>(peaks.size()) < n) peaks.push_back(0.0);
  return peaks;
}

// Prony linear-prediction rates; empty when the grid is not uniform enough.
ComplexVector prony_rates(const BCFSamples& samples, int n) {
  const int m = samples.size();
  if (m < 2 * n + 2) return ComplexVector(0);
  const double dt = samples.taus(1) - samples.taus(0);
  for (int i = 1; i + 1 < m; ++i)
    if (std::abs(samples.taus(i + 1) - samples.taus(i) - dt) > 1e-9 * std::max(dt, 1.0))
      return ComplexVector(0);

  const int rows = m - n;
  ComplexMatrix hankel(rows, n);
  ComplexVector rhs(rows);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < n; ++j) hankel(i, j) = samples.values(i + j);
    rhs(i) = samples.values(i + n);
  }
  const ComplexVector coeffs = hankel.colPivHouseholderQr().solve(rhs);
  // roots of z^n - c_{n-1} z^{n-1} - ... - c_0 via the companion matrix
  ComplexMatrix companion = ComplexMatrix::Zero(n, n);
  for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
  companion.col(n - 1) = coeffs;
  Eigen::ComplexEigenSolver<ComplexMatrix> solver(companion, false);
  ComplexVector lambdas(n);
  int kept = 0;
  for (int i = 0; i < n; ++i) {
    const Complex mu = solver.eigenvalues()(i);
    if (std::abs(mu) <= 1e-12) continue;
    const Complex lambda = -std::log(mu) / dt;
    if (lambda.real() > 1e-6 && std::isfinite(lambda.real()) && std::isfinite(lambda.imag()))
      lambdas(kept++) = lambda;
  }
  lambdas.conservativeResize(kept);
  return lambdas;
}

ComplexVector initial_rates(const BCFSamples& samples, int n, int restart, RngStream& rng,
                            const FitConfig& config) {
  const int m = samples.size();
  const double span = std::max(samples.taus(m - 1) - samples.taus(0), 1e-6);
  const double rate_lo = 0.5 / span;
  const double rate_hi = std::max(2.0 * m / span, 4.0 * rate_lo);

  if (config.prony_init && restart == 0) {
    const ComplexVector prony = prony_rates(samples, n);
    if (prony.size() == n) return prony;
  }
  const auto peaks = dominant_frequencies(samples, n);
  ComplexVector lambdas(n);
  for (int j = 0; j < n; ++j) {
    const double base =
        std::exp(std::log(rate_lo) +
                 (std::log(rate_hi) - std::log(rate_lo)) * (j + 0.5) / n);
    const double jitter = restart == 0 ? 1.0 : std::exp(1.5 * rng.gaussian());
    const double freq = restart == 0 ? peaks[j]
                                     : peaks[j] + rng.gaussian() * (restart > 1 ? 2.0 : 0.3);
    lambdas(j) = Complex(base * jitter, freq);
  }
  return lambdas;
}

struct RestartOutcome {
  LevMarResult lm;
  int restart = 0;
};

template <class Model, class Init>
RestartOutcome multi_start(const Model& model, const Init& make_x0, const FitConfig& config) {
  LevMarOptions options;
  options.max_iterations = config.max_iterations;
  options.objective_rtol = config.objective_rtol;
  options.gradient_tol = config.gradient_tol;

  RestartOutcome best;
  bool have_best = false;
  for (int restart = 0; restart < std::max(1, config.restarts); ++restart) {
    const RealVector x0 = make_x0(restart);
    const LevMarResult result = levenberg_marquardt(model, x0, options);
    if (!have_best || result.objective < best.lm.objective) {
      best.lm = result;
      best.restart = restart;
      have_best = true;
    }
    if (best.lm.objective < 1e-24) break;  // exact recovery, stop burning restarts
  }
  return best;
}

}  // namespace

FitResult fit_physical(const BCFSamples& samples, int n_terms, const FitConfig& config) {
  if (n_terms < 1) throw InvalidN("n_terms must be >= 1");
  samples.validate();
  const RealVector sqrt_w = effective_sqrt_weights(samples, config);
  PhysicalModel model{&samples, sqrt_w, n_terms};

  auto make_x0 = [&](int restart) {
    RngStream rng(config.seed, static_cast<std::uint64_t>(restart));
    const ComplexVector lambdas = initial_rates(samples, n_terms, restart, rng, config);
    const ComplexVector g = amplitudes_least_squares(samples, sqrt_w, lambdas);
    RealVector x0(4 * n_terms);
    for (int j = 0; j < n_terms; ++j) {
      // diagonal seed: |r_j|^2 / (2 Re lambda_j) = G_j
      Complex r = sqrt_principal(g(j) * (lambdas(j) + std::conj(lambdas(j))));
      if (restart > 0)
        r *= std::exp(Complex(0.2 * rng.gaussian(), 0.5 * rng.gaussian()));
      x0(2 * j) = r.real();
      x0(2 * j + 1) = r.imag();
    }
    pack_rates(lambdas, x0, 2 * n_terms);
    return x0;
  };

  const RestartOutcome best = multi_start(model, make_x0, config);

  FitResult result;
  result.ansatz = FitAnsatz::Physical;
  result.parametrization.residues = unpack_residues(best.lm.x, n_terms);
  result.parametrization.lambdas = unpack_rates(best.lm.x, n_terms, 2 * n_terms);
  result.bcf = amplitudes_from_residues(result.parametrization);
  result.iterations = best.lm.iterations;
  result.converged = best.lm.converged;
  result.restarts_used = best.restart + 1;
  RealVector residuals;
  model(best.lm.x, residuals, nullptr);  // recomputed, never the cached value
  result.residual_norm = residuals.squaredNorm();
  result.positivity = certify_positivity(result.bcf);
  return result;
}

FitResult fit_direct(const BCFSamples& samples, int n_terms, const FitConfig& config) {
  if (n_terms < 1) throw InvalidN("n_terms must be >= 1");
  samples.validate();
  const RealVector sqrt_w = effective_sqrt_weights(samples, config);
  DirectModel model{&samples, sqrt_w, n_terms};

  auto make_x0 = [&](int restart) {
    RngStream rng(config.seed, 1000000 + static_cast<std::uint64_t>(restart));
    const ComplexVector lambdas = initial_rates(samples, n_terms, restart, rng, config);
    const ComplexVector g = amplitudes_least_squares(samples, sqrt_w, lambdas);
    RealVector x0(4 * n_terms - 1);
    for (int j = 0; j < n_terms; ++j) x0(j) = g(j).real();
    for (int j = 0; j < n_terms - 1; ++j) x0(n_terms + j) = g(j).imag();
    pack_rates(lambdas, x0, 2 * n_terms - 1);
    return x0;
  };

  const RestartOutcome best = multi_start(model, make_x0, config);

  FitResult result;
  result.ansatz = FitAnsatz::Direct;
  result.bcf.amplitudes = unpack_amplitudes(best.lm.x, n_terms);
  result.bcf.lambdas = unpack_rates(best.lm.x, n_terms, 2 * n_terms - 1);
  result.iterations = best.lm.iterations;
  result.converged = best.lm.converged;
  result.restarts_used = best.restart + 1;
  RealVector residuals;
  model(best.lm.x, residuals, nullptr);
  result.residual_norm = residuals.squaredNorm();
  result.positivity = certify_positivity(result.bcf);
  return result;
}

ComparisonReport compare_ansatz(const BCFSamples& samples, int n_terms,
                                const FitConfig& config) {
  ComparisonReport report;
  report.raw_parameter_count = 4 * n_terms;
  report.physical_effective_count = 4 * n_terms - 1;  // global phase of r is free
  report.direct_effective_count = 4 * n_terms - 1;    // hermiticity eliminates one
  try {
    report.physical = fit_physical(samples, n_terms, config);
  } catch (const std::exception& error) {
    report.physical_error = error.what();
  }
  try {
    report.direct = fit_direct(samples, n_terms, config);
  } catch (const std::exception& error) {
    report.direct_error = error.what();
  }
  return report;
}

}  // namespace pmh

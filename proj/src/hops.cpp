#include "pmh/hops.hpp"

#include <atomic>
#include <mutex>
#include <cmath>
#include <thread>

#include "pmh/errors.hpp"

namespace pmh {

namespace {

// Piecewise-linear view of a sampled path. Fixed-step trajectories step on
// half-grid multiples and hit the samples exactly; the adaptive driver
// interpolates in between and lands on every kink via hard points.
struct NoiseView {
  const NoisePath* path;
  Complex at(double t) const {
    const double x = t / path->dt;
    const auto last = static_cast<long>(path->samples.size()) - 1;
    long k = static_cast<long>(std::floor(x));
    if (k < 0) k = 0;
    if (k >= last) return path->samples[last];
    const double frac = x - static_cast<double>(k);
    const Complex a = path->samples[k], b = path->samples[k + 1];
    return a + frac * (b - a);
  }
  std::vector<double> kink_times() const {
    std::vector<double> out(path->samples.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = i * path->dt;
    return out;
  }
};

ComplexVector initial_full_state(const HilbertLayout& layout, const ComplexVector& psi0_sys) {
  if (psi0_sys.size() != layout.system_dim())
    throw ShapeMismatch("initial state does not match the system dimension");
  ComplexVector phi = ComplexVector::Zero(layout.dim());
  phi.head(layout.system_dim()) = psi0_sys;
  return phi;
}

}  // namespace

HopsOperators::HopsOperators(const ComplexMatrix& h_sys, const ComplexMatrix& s_op,
                             const ExponentialBCF& bcf, HilbertLayout layout)
    : layout_(std::move(layout)), bcf_(bcf), s_sys_(s_op) {
  if (layout_.n_modes() != bcf.size())
    throw ShapeMismatch("layout mode count must equal the number of exponential terms");
  bcf_.validate();
  const int n = bcf_.size();
  const int dim = layout_.dim();

  s_full = embed_system_operator(layout_, s_op).mat;
  sqrt_g = ComplexVector(n);
  lambdas = bcf_.lambdas;
  amplitudes = bcf_.amplitudes;

  drift = SparseMatrix(dim, dim);
  drift += SparseMatrix(Complex(0, -1) * embed_system_operator(layout_, h_sys).mat);
  displace = SparseMatrix(dim, dim);
  lower_weighted_ = SparseMatrix(dim, dim);
  raise_weighted_amp_ = SparseMatrix(dim, dim);
  for (int j = 0; j < n; ++j) {
    sqrt_g(j) = sqrt_principal(bcf_.amplitudes(j));
    lower.push_back(mode_lowering(layout_, j).mat);
    const SparseMatrix raise = SparseMatrix(lower[j].adjoint());
    const SparseMatrix both = SparseMatrix(sqrt_g(j) * lower[j]) + SparseMatrix(sqrt_g(j) * raise);
    displace += both;
    drift += SparseMatrix(Complex(0, -1) * SparseMatrix(s_full * both));
    drift += SparseMatrix(-bcf_.lambdas(j) * mode_number(layout_, j).mat);
    RealVector diag = RealVector::Zero(dim);
    for (int m = 0; m < layout_.mode_dim(); ++m)
      for (int s = 0; s < layout_.system_dim(); ++s)
        diag(layout_.flat_index(m, s)) = layout_.tuples()[m][j];
    number_diag.push_back(std::move(diag));
    lower_weighted_ += SparseMatrix(sqrt_g(j) * lower[j]);
    raise_weighted_amp_ += SparseMatrix(bcf_.amplitudes(j) * raise);
  }
}

namespace {

// Records output-time data common to the three variants.
struct Recorder {
  const HopsOperators* ops;
  const HopsConfig* config;
  Trajectory* trajectory;
  int n_shift = 0;  // trailing shift entries in the integration vector

  void operator()(double t, const ComplexVector& y, double log_norm = 0.0) const {
    const int dim = ops->layout().dim();
    const ComplexVector phi = y.head(dim);
    trajectory->vacuum.push_back(phi.head(ops->layout().system_dim()));

    TrajectoryState state;
    state.time = t;
    state.log_norm = log_norm;
    if (config->record_full_state) {
      state.phi = phi;
      if (n_shift > 0) state.nu = y.tail(n_shift);
    }
    trajectory->states.push_back(std::move(state));

    const double norm2 = phi.squaredNorm();
    const double vac2 = trajectory->vacuum.back().squaredNorm();
    if (vac2 > 0.0) {
      const ComplexVector& vac = trajectory->vacuum.back();
      trajectory->s_expectation.push_back(vac.dot(ops->s_sys() * vac).real() / vac2);
    } else {
      trajectory->s_expectation.push_back(0.0);
    }
    RealVector amps(ops->lower.size());
    for (std::size_t k = 0; k < ops->lower.size(); ++k)
      amps(static_cast<int>(k)) =
          norm2 > 0.0 ? std::abs(phi.dot(ops->lower[k] * phi)) / norm2 : 0.0;
    trajectory->mean_mode_amplitude.push_back(std::move(amps));
  }
};

double vacuum_s_expectation(const HopsOperators& ops, const ComplexVector& phi,
                            double collapse_tol, bool* collapsed) {
  const ComplexVector vac = phi.head(ops.layout().system_dim());
  const double vac2 = vac.squaredNorm();
  if (vac2 < collapse_tol * collapse_tol) {
    *collapsed = true;
    return 0.0;
  }
  return vac.dot(ops.s_sys() * vac).real() / vac2;
}

}  // namespace

Trajectory propagate_linear_hops(const HopsOperators& ops, const NoisePath& noise,
                                 const ComplexVector& psi0_sys,
                                 const std::vector<double>& t_grid, const HopsConfig& config) {
  NoiseView view{&noise};
  Trajectory trajectory;
  Recorder record{&ops, &config, &trajectory, 0};

  auto rhs = [&](double t, const ComplexVector& y, ComplexVector& dydt) {
    dydt.noalias() = ops.drift * y;
    dydt.noalias() += view.at(t) * (ops.s_full * y);
  };
  auto observer = [&](int, double t, const ComplexVector& y) { record(t, y); };
  const ComplexVector phi0 = initial_full_state(ops.layout(), psi0_sys);
  if (config.adaptive) {
    const auto kinks = view.kink_times();
    IntegratorConfig integ{.rtol = config.rtol, .atol = config.atol};
    integrate_adaptive(rhs, phi0, 0.0, t_grid, observer, integ, &kinks);
  } else {
    integrate_rk4(rhs, phi0, 0.0, t_grid, observer, config.dt);
  }
  return trajectory;
}

Trajectory propagate_nonlinear_hops(const HopsOperators& ops, const NoisePath& noise,
                                    const ComplexVector& psi0_sys,
                                    const std::vector<double>& t_grid,
                                    const HopsConfig& config) {
  NoiseView view{&noise};
  const int dim = ops.layout().dim();
  const int n = static_cast<int>(ops.lower.size());
  Trajectory trajectory;
  Recorder record{&ops, &config, &trajectory, n};
  bool collapsed = false;

  // state = [phi; m], m_k the exponential memory register of the shift:
  // ztilde^* = z^* + sum_k m_k with m_k' = -conj(lambda_k) m_k + conj(G_k) <S>.
  auto rhs = [&](double t, const ComplexVector& y, ComplexVector& dydt) {
    const auto phi = y.head(dim);
    const double s_mean = vacuum_s_expectation(ops, phi, config.norm_collapse_tol, &collapsed);
    const Complex shifted = view.at(t) + y.tail(n).sum();
    dydt.head(dim).noalias() = ops.drift * phi;
    dydt.head(dim).noalias() += shifted * (ops.s_full * phi);
    dydt.head(dim).noalias() += (kImag * s_mean) * (ops.lower_weighted() * phi);
    for (int k = 0; k < n; ++k)
      dydt(dim + k) = -std::conj(ops.lambdas(k)) * y(dim + k) +
                      std::conj(ops.amplitudes(k)) * s_mean;
  };

  ComplexVector y = ComplexVector::Zero(dim + n);
  y.head(dim) = initial_full_state(ops.layout(), psi0_sys);
  double log_norm = 0.0;
  double t_current = 0.0;
  const auto kinks = config.adaptive ? view.kink_times() : std::vector<double>{};
  for (double t_target : t_grid) {
    if (t_target > t_current + 1e-14) {
      auto capture = [&](int, double, const ComplexVector& y_out) { y = y_out; };
      if (config.adaptive) {
        IntegratorConfig integ{.rtol = config.rtol, .atol = config.atol};
        integrate_adaptive(rhs, y, t_current, std::vector<double>{t_target}, capture, integ,
                           &kinks);
      } else {
        integrate_rk4(rhs, y, t_current, std::vector<double>{t_target}, capture, config.dt);
      }
      t_current = t_target;
    }
    // rescale between segments so long runs cannot overflow; the readout is
    // scale-free (normalized projectors)
    const double norm = y.head(dim).norm();
    if (norm > 1e3) {
      y /= norm;
      log_norm += std::log(norm);
    }
    record(t_target, y, log_norm);
  }
  trajectory.norm_collapsed = collapsed;
  return trajectory;
}

Trajectory propagate_nuhops(const HopsOperators& ops, const NoisePath& noise,
                            const ComplexVector& psi0_sys, const std::vector<double>& t_grid,
                            const HopsConfig& config) {
  NoiseView view{&noise};
  const int dim = ops.layout().dim();
  const int n = static_cast<int>(ops.lower.size());
  Trajectory trajectory;
  Recorder record{&ops, &config, &trajectory, n};
  bool collapsed = false;

  // state = [psi; nu]. The generator is the exact image of the nonlinear
  // equation under the coherent shift exp(-sum_k nu_k b_k^+) with the
  // mean-field nu_k' = -lambda_k nu_k - i G_k <S>, written norm-preservingly:
  // scalar terms are replaced by -(Re<psi|R psi>/<psi|psi>) psi, which drops
  // out of the normalized readout and pins ||psi|| = 1 exactly.
  auto rhs = [&](double t, const ComplexVector& y, ComplexVector& dydt) {
    const auto psi = y.head(dim);
    const double norm2 = psi.squaredNorm();
    const double s_mean = vacuum_s_expectation(ops, psi, config.norm_collapse_tol, &collapsed);
    const Complex z_star = view.at(t);
    Complex shift_sum = 0.0;  // sum_k (nu_k^* + sqrt(G_k) nu_k)
    for (int k = 0; k < n; ++k)
      shift_sum += std::conj(y(dim + k)) + ops.sqrt_g(k) * y(dim + k);

    const Complex s_coeff = z_star - kImag * shift_sum;
    dydt.head(dim).noalias() = ops.drift * psi;
    dydt.head(dim).noalias() += s_coeff * (ops.s_full * psi);
    dydt.head(dim).noalias() += (kImag * s_mean) * (ops.lower_weighted() * psi);
    dydt.head(dim).noalias() += (kImag * s_mean) * (ops.raise_weighted_amp() * psi);

    if (norm2 > 0.0) {
      const double drift_rate = psi.dot(dydt.head(dim)).real() / norm2;
      dydt.head(dim).noalias() -= drift_rate * psi;
    }
    for (int k = 0; k < n; ++k)
      dydt(dim + k) = -ops.lambdas(k) * y(dim + k) - kImag * ops.amplitudes(k) * s_mean;
  };

  ComplexVector y0 = ComplexVector::Zero(dim + n);
  y0.head(dim) = initial_full_state(ops.layout(), psi0_sys);
  const double norm0 = y0.head(dim).norm();
  if (norm0 > 0.0) y0.head(dim) /= norm0;

  auto observer = [&](int, double t, const ComplexVector& y) {
    record(t, y);
    trajectory.max_norm_deviation =
        std::max(trajectory.max_norm_deviation, std::abs(y.head(dim).norm() - 1.0));
  };
  if (config.adaptive) {
    const auto kinks = view.kink_times();
    IntegratorConfig integ{.rtol = config.rtol, .atol = config.atol};
    integrate_adaptive(rhs, y0, 0.0, t_grid, observer, integ, &kinks);
  } else {
    integrate_rk4(rhs, y0, 0.0, t_grid, observer, config.dt);
  }
  trajectory.norm_collapsed = collapsed;
  return trajectory;
}

EnsembleStats ensemble_average(const std::vector<std::vector<ComplexVector>>& vacuum_series,
                               EnsembleMode mode, int n_batches) {
  const int n_traj = static_cast<int>(vacuum_series.size());
  if (n_traj < 2) throw InsufficientTrajectories("ensemble averaging needs >= 2 trajectories");
  const int n_times = static_cast<int>(vacuum_series[0].size());
  const int d = n_times > 0 ? static_cast<int>(vacuum_series[0][0].size()) : 0;
  n_batches = std::min(n_batches, n_traj);

  EnsembleStats stats;
  stats.used = n_traj;
  std::vector<std::vector<ComplexMatrix>> batch_sums(
      n_batches, std::vector<ComplexMatrix>(n_times, ComplexMatrix::Zero(d, d)));
  std::vector<int> batch_count(n_batches, 0);
  for (int i = 0; i < n_traj; ++i) {
    const int b = static_cast<int>((static_cast<long>(i) * n_batches) / n_traj);
    ++batch_count[b];
    for (int t = 0; t < n_times; ++t) {
      const ComplexVector& v = vacuum_series[i][t];
      ComplexMatrix outer = v * v.adjoint();
      if (mode == EnsembleMode::Normalized) {
        const double norm2 = v.squaredNorm();
        if (norm2 > 0.0) outer /= norm2;
      }
      batch_sums[b][t] += outer;
    }
  }

  stats.mean.assign(n_times, ComplexMatrix::Zero(d, d));
  stats.std_error.assign(n_times, ComplexMatrix::Zero(d, d));
  for (int t = 0; t < n_times; ++t) {
    for (int b = 0; b < n_batches; ++b) stats.mean[t] += batch_sums[b][t];
    stats.mean[t] /= static_cast<double>(n_traj);
    if (n_batches < 2) continue;
    ComplexMatrix var = ComplexMatrix::Zero(d, d);
    for (int b = 0; b < n_batches; ++b) {
      const ComplexMatrix batch_mean = batch_sums[b][t] / static_cast<double>(batch_count[b]);
      const ComplexMatrix diff = batch_mean - stats.mean[t];
      var += ComplexMatrix(diff.real().cwiseProduct(diff.real()).cast<Complex>()) +
             kImag * ComplexMatrix(diff.imag().cwiseProduct(diff.imag()).cast<Complex>());
    }
    var /= static_cast<double>(n_batches - 1);
    // SE of the grand mean: batch scatter / sqrt(batches)
    stats.std_error[t] = (var / static_cast<double>(n_batches))
                             .unaryExpr([](Complex z) {
                               return Complex(std::sqrt(z.real()), std::sqrt(z.imag()));
                             });
  }
  return stats;
}

EnsembleRun run_hops_ensemble(const HopsProblem& problem, HopsVariant variant,
                              const ComplexVector& psi0_sys, const std::vector<double>& t_grid,
                              const EnsembleConfig& config) {
  const auto bcf = amplitudes_from_residues(problem.param);
  const HopsOperators ops(problem.h_sys, problem.s_op, bcf, problem.layout);
  const double t_end = t_grid.empty() ? 0.0 : t_grid.back();
  const double noise_dt = config.trajectory.dt / 2.0;
  const int n_noise = static_cast<int>(std::ceil(t_end / noise_dt)) + 2;
  const OUNoiseGenerator generator(problem.param, noise_dt);

  const int n_traj = config.n_trajectories;
  std::vector<std::vector<ComplexVector>> vacuum(n_traj);
  std::vector<char> excluded(n_traj, 0);
  std::vector<double> norm_dev(n_traj, 0.0);
  std::vector<RealVector> amp_sums(t_grid.size(),
                                   RealVector::Zero(problem.layout.n_modes()));
  std::mutex amp_mutex;

  auto worker_body = [&](int i) {
    const NoisePath path = generator.sample(n_noise, config.seed, i);
    Trajectory trajectory;
    switch (variant) {
      case HopsVariant::Linear:
        trajectory = propagate_linear_hops(ops, path, psi0_sys, t_grid, config.trajectory);
        break;
      case HopsVariant::Nonlinear:
        trajectory = propagate_nonlinear_hops(ops, path, psi0_sys, t_grid, config.trajectory);
        break;
      case HopsVariant::NuHops:
        trajectory = propagate_nuhops(ops, path, psi0_sys, t_grid, config.trajectory);
        break;
    }
    if (trajectory.norm_collapsed) {
      excluded[i] = 1;
      return;
    }
    vacuum[i] = std::move(trajectory.vacuum);
    norm_dev[i] = trajectory.max_norm_deviation;
    std::lock_guard<std::mutex> lock(amp_mutex);
    for (std::size_t t = 0; t < t_grid.size(); ++t)
      amp_sums[t] += trajectory.mean_mode_amplitude[t];
  };

  const int n_threads = std::max(1, config.threads);
  if (n_threads == 1) {
    for (int i = 0; i < n_traj; ++i) worker_body(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int w = 0; w < n_threads; ++w)
      pool.emplace_back([&]() {
        for (int i = next.fetch_add(1); i < n_traj; i = next.fetch_add(1)) worker_body(i);
      });
    for (auto& th : pool) th.join();
  }

  EnsembleRun run;
  run.times = t_grid;
  for (int i = 0; i < n_traj; ++i)
    if (excluded[i]) ++run.excluded;
  if (run.excluded > config.max_excluded_fraction * n_traj)
    throw NormCollapse("more than the allowed fraction of trajectories collapsed (" +
                       std::to_string(run.excluded) + " of " + std::to_string(n_traj) + ")");

  std::vector<std::vector<ComplexVector>> kept;
  kept.reserve(n_traj - run.excluded);
  for (int i = 0; i < n_traj; ++i) {
    if (!excluded[i]) {
      kept.push_back(std::move(vacuum[i]));
      run.max_norm_deviation = std::max(run.max_norm_deviation, norm_dev[i]);
    }
  }
  run.stats = ensemble_average(
      kept, variant == HopsVariant::Linear ? EnsembleMode::Linear : EnsembleMode::Normalized,
      config.n_batches);
  for (std::size_t t = 0; t < t_grid.size(); ++t)
    run.max_mean_mode_amplitude = std::max(
        run.max_mean_mode_amplitude, amp_sums[t].maxCoeff() / std::max(1, n_traj - run.excluded));
  return run;
}

NoisePath zero_noise(double dt, int n_steps) {
  NoisePath path;
  path.dt = dt;
  path.samples.assign(n_steps + 1, Complex(0.0, 0.0));
  path.generator = "zero";
  return path;
}

}  // namespace pmh

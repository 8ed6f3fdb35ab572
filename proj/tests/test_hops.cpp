#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

#include "helpers.hpp"
#include "pmh/heom.hpp"
#include "pmh/hops.hpp"

using namespace pmh;
using namespace pmh::testing;
using doctest::Approx;

namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = a + (b - a) * i / (n - 1);
  return out;
}

ComplexVector plus_state() {
  ComplexVector v(2);
  v << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  return v;
}

ComplexVector up_state() {
  ComplexVector v(2);
  v << 1.0, 0.0;
  return v;
}

struct PauliTrace {
  double x, y, z;
};

PauliTrace pauli_expectations(const ComplexMatrix& rho) {
  return {(rho * pauli_x()).trace().real(), (rho * pauli_y()).trace().real(),
          (rho * pauli_z()).trace().real()};
}

// Reference HEOM reduced states for a fixture.
std::vector<ComplexMatrix> heom_reference(const ComplexMatrix& h_sys, const ComplexMatrix& s_op,
                                          const ExponentialBCF& bcf,
                                          const std::vector<double>& t_grid, int depth) {
  HilbertLayout layout(2, std::vector<int>(bcf.size(), depth), depth);
  const auto generator = build_generator(h_sys, s_op, bcf, layout);
  HeomConfig config;
  config.boundary_warn_threshold = 1.0;
  const auto run = propagate(generator, up_state() * up_state().adjoint(), t_grid, config);
  std::vector<ComplexMatrix> out;
  for (const auto& state : run.states) out.push_back(extract_system(generator, state));
  return out;
}

}  // namespace

TEST_CASE("zero noise and empty bath: plain Schrodinger evolution") {
  ExponentialBCF empty;
  empty.lambdas = ComplexVector(0);
  empty.amplitudes = ComplexVector(0);
  HopsOperators ops(0.5 * pauli_x(), pauli_z(), empty, HilbertLayout(2, {}));
  HopsConfig config;
  config.dt = 1e-3;
  const auto noise = zero_noise(config.dt / 2.0, 4100);
  const auto trajectory =
      propagate_linear_hops(ops, noise, up_state(), linspace(0.0, 2.0, 5), config);
  for (std::size_t i = 0; i < trajectory.vacuum.size(); ++i) {
    const double t = trajectory.states[i].time;
    const ComplexVector expected = (-kImag * (0.5 * pauli_x()) * t).exp() * up_state();
    CHECK((trajectory.vacuum[i] - expected).norm() < 1e-9);
  }
}

TEST_CASE("linear HOPS ensemble: pure dephasing against the quadrature oracle") {
  DephasingFixture fixture;
  HopsProblem problem;
  problem.h_sys = fixture.h_sys;
  problem.s_op = fixture.s_op;
  problem.param = spectral_factorization(fixture.bcf);
  problem.layout = HilbertLayout(2, {8}, 8);
  EnsembleConfig config;
  config.n_trajectories = 4000;
  config.seed = 314;
  config.trajectory.dt = 5e-3;
  const auto t_grid = linspace(0.0, 2.0, 5);
  const auto run = run_hops_ensemble(problem, HopsVariant::Linear, plus_state(), t_grid, config);

  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const double phi = dephasing_exponent(fixture.bcf, t_grid[i]);
    const Complex expected = 0.5 * std::exp(-phi);
    const Complex estimate = run.stats.mean[i](0, 1);
    const Complex se = run.stats.std_error[i](0, 1);
    CHECK(std::abs(estimate.real() - expected.real()) < 3.0 * se.real() + 1e-4);
    CHECK(std::abs(estimate.imag() - expected.imag()) < 3.0 * se.imag() + 1e-4);
    // linear-mode trace is conserved in the mean only
    const double trace = run.stats.mean[i].trace().real();
    const double trace_se =
        run.stats.std_error[i](0, 0).real() + run.stats.std_error[i](1, 1).real();
    CHECK(std::abs(trace - 1.0) < 3.0 * trace_se + 1e-4);
  }
}

TEST_CASE("linear HOPS ensemble matches HEOM on the spin-boson fixture") {
  SpinBosonFixture fixture;
  HopsProblem problem;
  problem.h_sys = fixture.h_sys;
  problem.s_op = fixture.s_op;
  problem.param = spectral_factorization(fixture.bcf);
  problem.layout = HilbertLayout(2, {5, 5}, 5);
  EnsembleConfig config;
  config.n_trajectories = 3000;
  config.seed = 2718;
  config.trajectory.dt = 5e-3;
  const auto t_grid = linspace(0.0, 2.0, 5);
  const auto reference = heom_reference(fixture.h_sys, fixture.s_op, fixture.bcf, t_grid, 8);
  const auto run = run_hops_ensemble(problem, HopsVariant::Linear, up_state(), t_grid, config);
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const auto expected = pauli_expectations(reference[i]);
    const auto got = pauli_expectations(run.stats.mean[i]);
    const auto se = run.stats.std_error[i];
    const double se_scale = 2.0 * (se(0, 1).real() + se(0, 1).imag()) +
                            se(0, 0).real() + se(1, 1).real();
    CHECK(std::abs(got.x - expected.x) < 3.0 * se_scale + 2e-3);
    CHECK(std::abs(got.y - expected.y) < 3.0 * se_scale + 2e-3);
    CHECK(std::abs(got.z - expected.z) < 3.0 * se_scale + 2e-3);
  }
}

TEST_CASE("nonlinear HOPS with zero noise and zero S-expectation is exactly linear") {
  DephasingFixture fixture;
  HopsOperators ops(fixture.h_sys, fixture.s_op, fixture.bcf, HilbertLayout(2, {8}, 8));
  HopsConfig config;
  config.dt = 2e-3;
  config.record_full_state = true;
  const auto noise = zero_noise(config.dt / 2.0, 2100);
  const auto t_grid = linspace(0.0, 2.0, 9);
  // |+> has <sigma_z> = 0 and zero noise keeps it that way along the trajectory
  const auto linear = propagate_linear_hops(ops, noise, plus_state(), t_grid, config);
  const auto nonlinear = propagate_nonlinear_hops(ops, noise, plus_state(), t_grid, config);
  CHECK_FALSE(nonlinear.norm_collapsed);
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    CHECK(std::abs(nonlinear.s_expectation[i]) < 1e-10);
    CHECK((nonlinear.states[i].phi - linear.states[i].phi).norm() < 1e-10);
    CHECK(nonlinear.states[i].nu.cwiseAbs().maxCoeff() < 1e-12);  // registers stay empty
  }
}

TEST_CASE("nonlinear HOPS ensemble matches HEOM with smaller errors than linear") {
  SpinBosonFixture fixture;
  HopsProblem problem;
  problem.h_sys = fixture.h_sys;
  problem.s_op = fixture.s_op;
  problem.param = spectral_factorization(fixture.bcf);
  problem.layout = HilbertLayout(2, {5, 5}, 5);
  EnsembleConfig config;
  config.n_trajectories = 3000;
  config.seed = 99;
  config.trajectory.dt = 5e-3;
  const auto t_grid = linspace(0.0, 2.0, 5);
  const auto reference = heom_reference(fixture.h_sys, fixture.s_op, fixture.bcf, t_grid, 8);

  const auto nonlinear =
      run_hops_ensemble(problem, HopsVariant::Nonlinear, up_state(), t_grid, config);
  const auto linear = run_hops_ensemble(problem, HopsVariant::Linear, up_state(), t_grid, config);

  double linear_se = 0.0, nonlinear_se = 0.0;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const auto expected = pauli_expectations(reference[i]);
    const auto got = pauli_expectations(nonlinear.stats.mean[i]);
    const auto se = nonlinear.stats.std_error[i];
    const double se_scale = 2.0 * (se(0, 1).real() + se(0, 1).imag()) +
                            se(0, 0).real() + se(1, 1).real();
    CHECK(std::abs(got.x - expected.x) < 3.0 * se_scale + 2e-3);
    CHECK(std::abs(got.z - expected.z) < 3.0 * se_scale + 2e-3);
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) {
        linear_se += linear.stats.std_error[i](r, c).real() +
                     linear.stats.std_error[i](r, c).imag();
        nonlinear_se += nonlinear.stats.std_error[i](r, c).real() +
                        nonlinear.stats.std_error[i](r, c).imag();
      }
  }
  CHECK(nonlinear_se < linear_se);  // importance-sampled variant has lower variance
}

TEST_CASE("memory registers equal the direct quadrature of the shift integral") {
  // zero-noise spin-boson trajectory so <S>_t is smooth; the register ODE is
  // checked against the exact exponential convolution of the piecewise-linear
  // interpolant of the recorded <S> series.
  SpinBosonFixture fixture;
  HopsOperators ops(fixture.h_sys, fixture.s_op, fixture.bcf, HilbertLayout(2, {6, 6}, 6));
  HopsConfig config;
  config.dt = 1e-3;
  config.record_full_state = true;
  const auto noise = zero_noise(config.dt / 2.0, 4100);
  const auto t_grid = linspace(0.0, 2.0, 2001);  // record every integration step
  const auto trajectory = propagate_nonlinear_hops(ops, noise, up_state(), t_grid, config);

  const auto bcf = fixture.bcf;
  for (int k = 0; k < 2; ++k) {
    const Complex rate = std::conj(bcf.lambdas(k));
    const Complex weight = std::conj(bcf.amplitudes(k));
    Complex integral = 0.0;
    const double h = t_grid[1] - t_grid[0];
    const Complex decay = std::exp(-rate * h);
    const Complex i1 = (1.0 - decay) / rate;
    const Complex i2 = h / rate - (1.0 - decay) / (rate * rate);
    for (std::size_t i = 0; i + 1 < t_grid.size(); ++i) {
      const double s0 = trajectory.s_expectation[i];
      const double s1 = trajectory.s_expectation[i + 1];
      integral = decay * integral + weight * (s0 * i1 + (s1 - s0) * i2 / h);
    }
    CHECK(std::abs(trajectory.states.back().nu(k) - integral) < 1e-8);
  }
}

TEST_CASE("nuHOPS conserves the norm along every trajectory") {
  SpinBosonFixture fixture;
  HopsProblem problem;
  problem.h_sys = fixture.h_sys;
  problem.s_op = fixture.s_op;
  problem.param = spectral_factorization(fixture.bcf);
  problem.layout = HilbertLayout(2, {5, 5}, 5);
  const auto t_grid = linspace(0.0, 2.0, 9);
  const auto bcf = amplitudes_from_residues(problem.param);
  HopsOperators ops(problem.h_sys, problem.s_op, bcf, problem.layout);
  OUNoiseGenerator generator(problem.param, 2.5e-3 / 2.0);

  HopsConfig adaptive;
  adaptive.adaptive = true;
  adaptive.rtol = 1e-9;
  adaptive.atol = 1e-9;
  adaptive.dt = 2.5e-3;
  for (int traj = 0; traj < 5; ++traj) {
    const auto path = generator.sample(1700, 5, traj);
    const auto result = propagate_nuhops(ops, path, up_state(), t_grid, adaptive);
    CHECK(result.max_norm_deviation < 1e-6);
  }
}

TEST_CASE("nuHOPS with zero shift reduces to linear HOPS after normalization") {
  DephasingFixture fixture;
  HopsOperators ops(fixture.h_sys, fixture.s_op, fixture.bcf, HilbertLayout(2, {8}, 8));
  HopsConfig config;
  config.dt = 2e-3;
  config.record_full_state = true;
  const auto noise = zero_noise(config.dt / 2.0, 2100);
  const auto t_grid = linspace(0.0, 2.0, 9);
  const auto linear = propagate_linear_hops(ops, noise, plus_state(), t_grid, config);
  const auto nu = propagate_nuhops(ops, noise, plus_state(), t_grid, config);
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    CHECK(nu.states[i].nu.cwiseAbs().maxCoeff() < 1e-12);
    // states agree up to the real normalization factor
    const ComplexVector a = linear.vacuum[i] / linear.vacuum[i].norm();
    const ComplexVector b = nu.vacuum[i] / nu.vacuum[i].norm();
    const Complex overlap = a.dot(b);
    CHECK(std::abs(std::abs(overlap) - 1.0) < 1e-9);
    // and the relative phase is also untouched (the correction is real)
    CHECK(std::abs(overlap - Complex(1.0, 0.0)) < 1e-6);
  }
}

TEST_CASE("nuHOPS ensemble matches HEOM and keeps mode amplitudes small") {
  SpinBosonFixture fixture;
  HopsProblem problem;
  problem.h_sys = fixture.h_sys;
  problem.s_op = fixture.s_op;
  problem.param = spectral_factorization(fixture.bcf);
  problem.layout = HilbertLayout(2, {5, 5}, 5);
  EnsembleConfig config;
  config.n_trajectories = 2000;
  config.seed = 1618;
  config.trajectory.dt = 5e-3;
  const auto t_grid = linspace(0.0, 2.0, 5);
  const auto reference = heom_reference(fixture.h_sys, fixture.s_op, fixture.bcf, t_grid, 8);
  const auto run = run_hops_ensemble(problem, HopsVariant::NuHops, up_state(), t_grid, config);
  CHECK(run.max_norm_deviation < 1e-4);  // fixed-step run, structural conservation
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const auto expected = pauli_expectations(reference[i]);
    const auto got = pauli_expectations(run.stats.mean[i]);
    const auto se = run.stats.std_error[i];
    const double se_scale = 2.0 * (se(0, 1).real() + se(0, 1).imag()) +
                            se(0, 0).real() + se(1, 1).real();
    CHECK(std::abs(got.x - expected.x) < 3.0 * se_scale + 2e-3);
    CHECK(std::abs(got.z - expected.z) < 3.0 * se_scale + 2e-3);
  }
  // the per-trajectory shift keeps the hierarchy lightly excited
  CHECK(run.max_mean_mode_amplitude < 0.5);

  const auto nonlinear =
      run_hops_ensemble(problem, HopsVariant::Nonlinear, up_state(), t_grid, config);
  CHECK(run.max_mean_mode_amplitude < nonlinear.max_mean_mode_amplitude);
}

TEST_CASE("ensemble_average contracts") {
  SUBCASE("identical trajectories have zero standard error") {
    ComplexVector v(2);
    v << Complex(0.8, 0.0), Complex(0.0, 0.6);
    std::vector<std::vector<ComplexVector>> series(8, std::vector<ComplexVector>(3, v));
    const auto stats = ensemble_average(series, EnsembleMode::Linear, 4);
    for (int t = 0; t < 3; ++t) {
      CHECK((stats.mean[t] - v * v.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
      CHECK(stats.std_error[t].cwiseAbs().maxCoeff() < 1e-14);
    }
  }
  SUBCASE("normalized mode yields exactly unit trace") {
    RngStream rng(12, 0);
    std::vector<std::vector<ComplexVector>> series;
    for (int i = 0; i < 17; ++i) {
      ComplexVector v(2);
      v << Complex(rng.gaussian(), rng.gaussian()), Complex(rng.gaussian(), rng.gaussian());
      series.push_back({v, 2.0 * v});
    }
    const auto stats = ensemble_average(series, EnsembleMode::Normalized, 5);
    for (const auto& mean : stats.mean) CHECK(mean.trace().real() == Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("fewer than two trajectories rejected") {
    std::vector<std::vector<ComplexVector>> one(1);
    CHECK_THROWS_AS(ensemble_average(one, EnsembleMode::Linear), InsufficientTrajectories);
  }
}

TEST_CASE("collapsed trajectories beyond the allowed fraction abort the ensemble") {
  DephasingFixture fixture;
  HopsProblem problem;
  problem.h_sys = fixture.h_sys;
  problem.s_op = fixture.s_op;
  problem.param = spectral_factorization(fixture.bcf);
  problem.layout = HilbertLayout(2, {4}, 4);
  EnsembleConfig config;
  config.n_trajectories = 16;
  config.trajectory.dt = 5e-3;
  // an absurd collapse tolerance marks every trajectory as collapsed
  config.trajectory.norm_collapse_tol = 10.0;
  CHECK_THROWS_AS(run_hops_ensemble(problem, HopsVariant::Nonlinear, plus_state(),
                                    linspace(0.0, 0.2, 3), config),
                  NormCollapse);
}

TEST_CASE("ensemble runs are reproducible for a fixed seed") {
  DephasingFixture fixture;
  HopsProblem problem;
  problem.h_sys = fixture.h_sys;
  problem.s_op = fixture.s_op;
  problem.param = spectral_factorization(fixture.bcf);
  problem.layout = HilbertLayout(2, {4}, 4);
  EnsembleConfig config;
  config.n_trajectories = 64;
  config.seed = 7;
  config.trajectory.dt = 5e-3;
  const auto t_grid = linspace(0.0, 0.5, 3);
  const auto a = run_hops_ensemble(problem, HopsVariant::Linear, plus_state(), t_grid, config);
  const auto b = run_hops_ensemble(problem, HopsVariant::Linear, plus_state(), t_grid, config);
  config.threads = 3;
  const auto c = run_hops_ensemble(problem, HopsVariant::Linear, plus_state(), t_grid, config);
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    CHECK((a.stats.mean[i] - b.stats.mean[i]).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.stats.mean[i] - c.stats.mean[i]).cwiseAbs().maxCoeff() == 0.0);
  }
}

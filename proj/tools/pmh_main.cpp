// pmh: fit, certify, build and simulate exponential-bath open-system models.
//
// Subcommands
//   fit          exponential BCF fits (physicality-preserving and direct)
//   certify      spectral-density non-negativity certification
//   build        pseudomode Lindblad model from a BCF or parametrization
//   simulate     heom | lindblad | hops propagation to observable CSV
//   compare      cross-engine trace-distance comparison with a threshold
//   noise-check  empirical noise correlation against the target BCF
//
// Exit codes: 0 success, 1 configuration error, 2 numerical failure,
// 3 comparison threshold exceeded.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "pmh/bcf.hpp"
#include "pmh/errors.hpp"
#include "pmh/fit.hpp"
#include "pmh/heom.hpp"
#include "pmh/hops.hpp"
#include "pmh/io.hpp"
#include "pmh/lindblad.hpp"
#include "pmh/noise.hpp"
#include "pmh/pseudomode.hpp"

namespace {

using namespace pmh;
using pmh::io::json;

namespace fs = std::filesystem;

std::uint64_t default_seed() {
  if (const char* env = std::getenv("PMH_SEED")) return std::strtoull(env, nullptr, 10);
  return 0;
}

std::string out_path(const std::string& dir, const std::string& name) {
  fs::create_directories(dir);
  return (fs::path(dir) / name).string();
}

json with_stamp(json payload, const json& resolved) {
  payload["resolved_config"] = resolved;
  payload["config_hash"] = io::config_hash(resolved);
  return payload;
}

// Accepts a bare parametrization ("residues"), a bare BCF ("amplitudes"), a
// fit-result file (nested "parametrization"/"bcf") or a built model file
// (residues recovered from the construction provenance).
struct BathInput {
  std::optional<ExponentialBCF> bcf;
  std::optional<PositiveParametrization> parametrization;
};

BathInput load_bath(const std::string& path) {
  const json j = io::read_json_file(path);
  BathInput input;
  if (j.contains("residues")) {
    input.parametrization = io::parametrization_from_json(j);
  } else if (j.contains("amplitudes")) {
    input.bcf = io::bcf_from_json(j);
  } else if (j.contains("parametrization")) {
    input.parametrization = io::parametrization_from_json(j["parametrization"]);
  } else if (j.contains("bcf")) {
    input.bcf = io::bcf_from_json(j["bcf"]);
  } else if (j.contains("c") && j.contains("coupling_tilde") && j.contains("lambdas")) {
    PositiveParametrization p;
    p.lambdas = io::vector_from_json(j["lambdas"]);
    const ComplexVector c = io::vector_from_json(j["c"]);
    const ComplexVector gt = io::vector_from_json(j["coupling_tilde"]);
    p.residues = ComplexVector(c.size());
    for (int k = 0; k < c.size(); ++k) p.residues(k) = c(k) * std::conj(gt(k));
    input.parametrization = p;
  } else {
    throw ConfigError(path + " carries neither a BCF, a parametrization, a fit result "
                             "nor a pseudomode model with provenance");
  }
  return input;
}

// The hierarchy truncates by total excitation (depth = truncation.excitation_cap,
// default 8); per-mode box caps are the fallback when only mode_caps is given.
HilbertLayout heom_layout(const io::ProblemConfig& config, int n_modes) {
  if (config.excitation_cap) {
    const int depth = *config.excitation_cap;
    return HilbertLayout(static_cast<int>(config.h_sys.rows()),
                         std::vector<int>(n_modes, depth), depth);
  }
  std::vector<int> caps = config.mode_caps;
  if (caps.empty()) caps.assign(n_modes, 8);
  if (static_cast<int>(caps.size()) != n_modes)
    throw ConfigError("truncation.mode_caps does not match the bath size");
  const HilbertLayout layout(static_cast<int>(config.h_sys.rows()), caps);
  return layout;
}

HilbertLayout lindblad_layout(const io::ProblemConfig& config, int n_modes) {
  std::vector<int> caps = config.mode_caps;
  if (caps.empty()) caps.assign(n_modes, 6);
  if (static_cast<int>(caps.size()) != n_modes)
    throw ConfigError("truncation.mode_caps does not match the bath size");
  return HilbertLayout(static_cast<int>(config.h_sys.rows()), caps);
}

std::vector<std::string> density_columns(int d) {
  std::vector<std::string> columns{"t"};
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) {
      columns.push_back("rho_" + std::to_string(r) + std::to_string(c) + "_re");
      columns.push_back("rho_" + std::to_string(r) + std::to_string(c) + "_im");
    }
  return columns;
}

void append_density(std::vector<double>& row, const ComplexMatrix& rho) {
  for (int r = 0; r < rho.rows(); ++r)
    for (int c = 0; c < rho.cols(); ++c) {
      row.push_back(rho(r, c).real());
      row.push_back(rho(r, c).imag());
    }
}

std::vector<ComplexMatrix> run_engine(const std::string& engine,
                                      const io::ProblemConfig& config) {
  if (engine == "heom") {
    const auto bcf = config.model ? throw ConfigError("heom needs a bcf or parametrization bath")
                                  : config.effective_bcf();
    const auto layout = heom_layout(config, bcf.size());
    const auto generator = build_generator(config.h_sys, config.s_op, bcf, layout);
    HeomConfig heom_config;
    heom_config.integrator = config.integrator;
    const auto run = propagate(generator, config.rho0, config.t_grid, heom_config);
    if (run.truncation_warning)
      std::cerr << "[pmh] warning: hierarchy boundary shell reached "
                << run.max_boundary_fraction << " of the norm; consider a deeper cap\n";
    std::vector<ComplexMatrix> reduced;
    for (const auto& state : run.states) reduced.push_back(extract_system(generator, state));
    return reduced;
  }
  if (engine == "lindblad") {
    LindbladProblem problem;
    problem.h_sys = config.h_sys;
    problem.s_op = config.s_op;
    problem.model =
        config.model ? *config.model : assemble_pseudomode(config.effective_parametrization());
    problem.layout = lindblad_layout(config, problem.model.size());
    LindbladConfig lindblad_config;
    lindblad_config.integrator = config.integrator;
    const auto run = propagate_and_reduce(problem, config.rho0, config.t_grid, lindblad_config);
    if (run.truncation_warning)
      std::cerr << "[pmh] warning: pseudomode boundary population reached "
                << run.max_boundary_population << "; consider larger Fock caps\n";
    return run.reduced;
  }
  if (engine == "hops") {
    HopsProblem problem;
    problem.h_sys = config.h_sys;
    problem.s_op = config.s_op;
    problem.param = config.effective_parametrization();
    problem.layout = heom_layout(config, problem.param.size());
    EnsembleConfig ensemble;
    ensemble.n_trajectories = config.trajectories;
    ensemble.seed = config.seed;
    ensemble.threads = config.threads;
    ensemble.trajectory.dt = config.hops_dt;
    ensemble.trajectory.adaptive = config.hops_adaptive;
    ensemble.trajectory.rtol = config.integrator.rtol;
    ensemble.trajectory.atol = config.integrator.atol;
    const HopsVariant variant = config.hops_variant == "linear"      ? HopsVariant::Linear
                                : config.hops_variant == "nonlinear" ? HopsVariant::Nonlinear
                                                                     : HopsVariant::NuHops;
    const auto run = run_hops_ensemble(problem, variant, config.initial_pure_state(),
                                       config.t_grid, ensemble);
    return run.stats.mean;
  }
  throw ConfigError("unknown engine: " + engine);
}

// ---------------------------------------------------------------------------

int cmd_fit(const std::string& input, int terms, const std::string& ansatz,
            const FitConfig& fit_config, const std::string& output_dir) {
  const BCFSamples samples = io::load_samples(input);
  const json resolved{{"command", "fit"},
                      {"input", input},
                      {"terms", terms},
                      {"ansatz", ansatz},
                      {"restarts", fit_config.restarts},
                      {"seed", fit_config.seed},
                      {"max_iterations", fit_config.max_iterations},
                      {"prony_init", fit_config.prony_init}};

  auto emit = [&](const FitResult& result, const std::string& name) {
    io::write_json_file(out_path(output_dir, name),
                        with_stamp(io::fit_result_to_json(result), resolved));
    std::cout << (result.ansatz == FitAnsatz::Physical ? "physical" : "direct")
              << " fit: residual " << result.residual_norm << ", "
              << (result.converged ? "converged" : "NOT converged") << " after "
              << result.iterations << " iterations (restart " << result.restarts_used << ")"
              << ", physical=" << (result.positivity.is_physical ? "yes" : "no") << "\n";
  };

  if (ansatz == "physical") {
    emit(fit_physical(samples, terms, fit_config), "fit_physical.json");
  } else if (ansatz == "direct") {
    emit(fit_direct(samples, terms, fit_config), "fit_direct.json");
  } else {
    const auto report = compare_ansatz(samples, terms, fit_config);
    if (report.physical) emit(*report.physical, "fit_physical.json");
    if (report.direct) emit(*report.direct, "fit_direct.json");
    if (!report.physical_error.empty())
      std::cerr << "physical arm failed: " << report.physical_error << "\n";
    if (!report.direct_error.empty())
      std::cerr << "direct arm failed: " << report.direct_error << "\n";
    json comparison{{"raw_parameter_count", report.raw_parameter_count},
                    {"physical_effective_count", report.physical_effective_count},
                    {"direct_effective_count", report.direct_effective_count}};
    if (report.physical) comparison["physical"] = io::fit_result_to_json(*report.physical);
    if (report.direct) comparison["direct"] = io::fit_result_to_json(*report.direct);
    io::write_json_file(out_path(output_dir, "fit_comparison.json"),
                        with_stamp(comparison, resolved));
    if (!report.physical && !report.direct) throw Error("both fit arms failed");
  }
  return 0;
}

int cmd_certify(const std::string& input, const CertConfig& cert_config,
                const std::string& method, bool export_curves, double tau_max,
                double omega_max, const std::string& output_dir) {
  const BathInput bath = load_bath(input);
  const ExponentialBCF bcf =
      bath.bcf ? *bath.bcf : amplitudes_from_residues(*bath.parametrization);
  CertConfig config = cert_config;
  if (method == "grid") config.method = CertMethod::Grid;
  if (method == "polynomial") config.method = CertMethod::PolynomialRoots;

  const auto report = certify_positivity(bcf, config);
  const json resolved{{"command", "certify"},
                      {"input", input},
                      {"method", method},
                      {"grid_points", config.grid_points},
                      {"grid_span_factor", config.grid_span_factor}};
  io::write_json_file(out_path(output_dir, "positivity.json"),
                      with_stamp(io::report_to_json(report), resolved));
  std::cout << "spectral density is " << (report.is_physical ? "" : "NOT ")
            << "non-negative (method " << report.method << ", min J = "
            << report.min_spectral_value << " at omega = " << report.witness_frequency
            << ")\n";

  if (export_curves) {
    std::vector<std::vector<double>> alpha_rows, j_rows;
    for (int i = 0; i <= 1000; ++i) {
      const double tau = tau_max * i / 1000.0;
      const Complex alpha = eval_bcf(bcf, tau);
      alpha_rows.push_back({tau, alpha.real(), alpha.imag()});
      const double omega = -omega_max + 2.0 * omega_max * i / 1000.0;
      j_rows.push_back({omega, eval_spectral_density(bcf, omega)});
    }
    io::write_csv(out_path(output_dir, "bcf_curve.csv"), {"tau", "re", "im"}, alpha_rows,
                  &resolved);
    io::write_csv(out_path(output_dir, "spectral_density.csv"), {"omega", "J"}, j_rows,
                  &resolved);
  }
  return 0;
}

int cmd_build(const std::string& input, bool verify, const std::string& output_dir) {
  const BathInput bath = load_bath(input);
  const PositiveParametrization parametrization =
      bath.parametrization ? *bath.parametrization : spectral_factorization(*bath.bcf);
  const auto model = assemble_pseudomode(parametrization);
  const json resolved{{"command", "build"}, {"input", input}, {"verify", verify}};

  json model_json = io::model_to_json(model);
  model_json["chain_feasible"] = chain_feasibility(parametrization);
  model_json["parametrization"] = io::parametrization_to_json(parametrization);
  io::write_json_file(out_path(output_dir, "pseudomode_model.json"),
                      with_stamp(model_json, resolved));
  std::cout << "built " << model.size() << "-mode pseudomode model (chain geometry "
            << (chain_feasibility(parametrization) ? "admitted" : "obstructed") << ")\n";

  if (verify) {
    const auto verification = verify_model(model);
    const json verification_json{
        {"h_hermiticity_defect", verification.h_hermiticity_defect},
        {"drift_consistency", verification.drift_consistency},
        {"lyapunov_residual", verification.lyapunov_residual},
        {"stationary_identity", verification.stationary_identity},
        {"gamma_rank_ratio", verification.gamma_rank_ratio},
        {"transform_residual", verification.transform_residual}};
    io::write_json_file(out_path(output_dir, "verification.json"),
                        with_stamp(verification_json, resolved));
    std::cout << "verification residuals: lyapunov " << verification.lyapunov_residual
              << ", stationary " << verification.stationary_identity << ", rank ratio "
              << verification.gamma_rank_ratio << "\n";
  }
  return 0;
}

int cmd_simulate(const std::string& engine, const std::string& problem_path,
                 const std::string& output_dir, const std::string& dump_path,
                 io::ProblemConfig config) {
  const json resolved = io::problem_to_json(config);
  const int d = static_cast<int>(config.h_sys.rows());
  auto columns = density_columns(d);
  columns.push_back("trace_re");
  columns.push_back("herm_defect");

  std::vector<ComplexMatrix> reduced;
  const EnsembleStats* stats = nullptr;
  EnsembleRun hops_run;
  if (engine == "hops") {
    HopsProblem problem;
    problem.h_sys = config.h_sys;
    problem.s_op = config.s_op;
    problem.param = config.effective_parametrization();
    problem.layout = heom_layout(config, problem.param.size());
    EnsembleConfig ensemble;
    ensemble.n_trajectories = config.trajectories;
    ensemble.seed = config.seed;
    ensemble.threads = config.threads;
    ensemble.trajectory.dt = config.hops_dt;
    ensemble.trajectory.adaptive = config.hops_adaptive;
    ensemble.trajectory.rtol = config.integrator.rtol;
    ensemble.trajectory.atol = config.integrator.atol;
    const HopsVariant variant = config.hops_variant == "linear"      ? HopsVariant::Linear
                                : config.hops_variant == "nonlinear" ? HopsVariant::Nonlinear
                                                                     : HopsVariant::NuHops;
    hops_run = run_hops_ensemble(problem, variant, config.initial_pure_state(), config.t_grid,
                                 ensemble);
    reduced = hops_run.stats.mean;
    stats = &hops_run.stats;
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) {
        columns.push_back("se_" + std::to_string(r) + std::to_string(c) + "_re");
        columns.push_back("se_" + std::to_string(r) + std::to_string(c) + "_im");
      }
    columns.push_back("norm_dev");
    if (hops_run.excluded > 0)
      std::cerr << "[pmh] warning: " << hops_run.excluded
                << " trajectories excluded after norm collapse\n";

    if (!dump_path.empty()) {
      // per-trajectory vacuum components for debugging, one row per
      // (trajectory, time); regenerated with the same per-trajectory streams
      const auto bcf = amplitudes_from_residues(problem.param);
      const HopsOperators ops(problem.h_sys, problem.s_op, bcf, problem.layout);
      const OUNoiseGenerator generator(problem.param, config.hops_dt / 2.0);
      const int n_noise =
          static_cast<int>(std::ceil(config.t_grid.back() / (config.hops_dt / 2.0))) + 2;
      std::vector<std::string> dump_columns{"trajectory", "t"};
      for (int s = 0; s < d; ++s) {
        dump_columns.push_back("psi0_" + std::to_string(s) + "_re");
        dump_columns.push_back("psi0_" + std::to_string(s) + "_im");
      }
      std::vector<std::vector<double>> dump_rows;
      for (int traj = 0; traj < config.trajectories; ++traj) {
        const auto path = generator.sample(n_noise, config.seed, traj);
        Trajectory trajectory;
        switch (variant) {
          case HopsVariant::Linear:
            trajectory = propagate_linear_hops(ops, path, config.initial_pure_state(),
                                               config.t_grid, ensemble.trajectory);
            break;
          case HopsVariant::Nonlinear:
            trajectory = propagate_nonlinear_hops(ops, path, config.initial_pure_state(),
                                                  config.t_grid, ensemble.trajectory);
            break;
          case HopsVariant::NuHops:
            trajectory = propagate_nuhops(ops, path, config.initial_pure_state(),
                                          config.t_grid, ensemble.trajectory);
            break;
        }
        for (std::size_t i = 0; i < config.t_grid.size(); ++i) {
          std::vector<double> row{static_cast<double>(traj), config.t_grid[i]};
          for (int s = 0; s < d; ++s) {
            row.push_back(trajectory.vacuum[i](s).real());
            row.push_back(trajectory.vacuum[i](s).imag());
          }
          dump_rows.push_back(std::move(row));
        }
      }
      io::write_csv(out_path(output_dir, dump_path), dump_columns, dump_rows, &resolved);
    }
  } else {
    reduced = run_engine(engine, config);
  }

  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < reduced.size(); ++i) {
    std::vector<double> row{config.t_grid[i]};
    append_density(row, reduced[i]);
    row.push_back(reduced[i].trace().real());
    row.push_back(hermiticity_defect(reduced[i]));
    if (stats) {
      append_density(row, stats->std_error[i]);
      row.push_back(hops_run.max_norm_deviation);
    }
    rows.push_back(std::move(row));
  }
  const std::string name = "observables_" + engine + ".csv";
  io::write_csv(out_path(output_dir, name), columns, rows, &resolved);
  std::cout << "wrote " << name << " (" << rows.size() << " time points, problem "
            << problem_path << ")\n";
  return 0;
}

int cmd_compare(const std::vector<std::string>& engines, double threshold,
                const std::string& output_dir, io::ProblemConfig config) {
  if (engines.size() < 2) throw ConfigError("compare needs at least two engines");
  const json resolved = io::problem_to_json(config);

  std::vector<std::vector<ComplexMatrix>> results;
  for (const auto& engine : engines) results.push_back(run_engine(engine, config));

  std::vector<std::string> columns{"t"};
  for (std::size_t a = 0; a < engines.size(); ++a)
    for (std::size_t b = a + 1; b < engines.size(); ++b)
      columns.push_back("td_" + engines[a] + "_" + engines[b]);
  double worst = 0.0;
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < config.t_grid.size(); ++i) {
    std::vector<double> row{config.t_grid[i]};
    for (std::size_t a = 0; a < engines.size(); ++a)
      for (std::size_t b = a + 1; b < engines.size(); ++b) {
        const double distance = trace_distance(results[a][i], results[b][i]);
        worst = std::max(worst, distance);
        row.push_back(distance);
      }
    rows.push_back(std::move(row));
  }
  io::write_csv(out_path(output_dir, "trace_distance.csv"), columns, rows, &resolved);
  std::cout << "max trace distance " << worst << " vs threshold " << threshold << ": "
            << (worst <= threshold ? "PASS" : "FAIL") << "\n";
  return worst <= threshold ? 0 : 3;
}

int cmd_noise_check(const std::string& input, int paths, double dt, int steps,
                    std::uint64_t seed, const std::string& output_dir) {
  const BathInput bath = load_bath(input);
  const PositiveParametrization parametrization =
      bath.parametrization ? *bath.parametrization : spectral_factorization(*bath.bcf);
  const ExponentialBCF bcf = amplitudes_from_residues(parametrization);
  const json resolved{{"command", "noise-check"}, {"input", input},    {"paths", paths},
                      {"dt", dt},                 {"steps", steps},    {"seed", seed}};

  const OUNoiseGenerator generator(parametrization, dt);
  const int stride = std::max(1, steps / 4);
  std::vector<int> probes;
  for (int k = 0; k <= steps; k += stride) probes.push_back(k);

  // accumulate E[path_a conj(path_b)] = conj(alpha(t_a - t_b)) on the grid
  const int n_probe = static_cast<int>(probes.size());
  std::vector<std::vector<Complex>> sum(n_probe, std::vector<Complex>(n_probe, 0.0));
  std::vector<std::vector<double>> sum_sq_re(n_probe, std::vector<double>(n_probe, 0.0));
  std::vector<std::vector<double>> sum_sq_im(n_probe, std::vector<double>(n_probe, 0.0));
  for (int path_idx = 0; path_idx < paths; ++path_idx) {
    const auto path = generator.sample(steps, seed, path_idx);
    for (int a = 0; a < n_probe; ++a)
      for (int b = 0; b <= a; ++b) {
        const Complex value = path.samples[probes[a]] * std::conj(path.samples[probes[b]]);
        sum[a][b] += value;
        sum_sq_re[a][b] += value.real() * value.real();
        sum_sq_im[a][b] += value.imag() * value.imag();
      }
  }

  double worst_sigma = 0.0;
  std::vector<std::vector<double>> rows;
  for (int a = 0; a < n_probe; ++a)
    for (int b = 0; b <= a; ++b) {
      const double count = paths;
      const Complex mean = sum[a][b] / count;
      const double var_re = std::max(sum_sq_re[a][b] / count - mean.real() * mean.real(), 0.0);
      const double var_im = std::max(sum_sq_im[a][b] / count - mean.imag() * mean.imag(), 0.0);
      const double se_re = std::sqrt(var_re / count), se_im = std::sqrt(var_im / count);
      const Complex target = std::conj(eval_bcf(bcf, (probes[a] - probes[b]) * dt));
      const double sigma_re = se_re > 0 ? std::abs(mean.real() - target.real()) / se_re : 0.0;
      const double sigma_im = se_im > 0 ? std::abs(mean.imag() - target.imag()) / se_im : 0.0;
      worst_sigma = std::max({worst_sigma, sigma_re, sigma_im});
      rows.push_back({probes[a] * dt, probes[b] * dt, mean.real(), mean.imag(), target.real(),
                      target.imag(), se_re, se_im, std::max(sigma_re, sigma_im)});
    }
  io::write_csv(out_path(output_dir, "noise_check.csv"),
                {"t", "s", "emp_re", "emp_im", "target_re", "target_im", "se_re", "se_im",
                 "sigma_dev"},
                rows, &resolved);
  const bool pass = worst_sigma < 4.0;
  io::write_json_file(out_path(output_dir, "noise_check.json"),
                      with_stamp(json{{"paths", paths},
                                      {"max_sigma_deviation", worst_sigma},
                                      {"pass_4_sigma", pass}},
                                 resolved));
  std::cout << "noise correlation max deviation " << worst_sigma << " standard errors: "
            << (pass ? "PASS" : "FAIL") << "\n";
  return pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pseudomode / hierarchy toolkit for exponential-bath open quantum dynamics"};
  app.require_subcommand(1);
  std::string output_dir = ".";
  app.add_option("--output-dir", output_dir, "directory for result files");

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "fit an exponential BCF to samples");
  std::string fit_input, fit_ansatz = "both";
  int fit_terms = 2;
  FitConfig fit_config;
  fit_config.seed = default_seed();
  fit_cmd->add_option("--input", fit_input, "samples CSV (tau,re,im[,w]) or JSON")->required();
  fit_cmd->add_option("--terms", fit_terms, "number of exponential terms");
  fit_cmd->add_option("--ansatz", fit_ansatz, "physical | direct | both")
      ->check(CLI::IsMember({"physical", "direct", "both"}));
  fit_cmd->add_option("--restarts", fit_config.restarts, "multi-start count");
  fit_cmd->add_option("--seed", fit_config.seed, "restart RNG seed");
  fit_cmd->add_option("--max-iterations", fit_config.max_iterations, "LM iteration cap");
  fit_cmd->add_option("--tail-weight-rate", fit_config.tail_weight_rate,
                      "w_i *= exp(-rate tau_i)");
  fit_cmd->add_flag("--prony", fit_config.prony_init, "Prony pre-pass for restart 0");

  // certify
  auto* certify_cmd = app.add_subcommand("certify", "certify spectral-density positivity");
  std::string certify_input, certify_method = "both";
  CertConfig cert_config;
  bool export_curves = false;
  double tau_max = 10.0, omega_max = 50.0;
  certify_cmd->add_option("--input", certify_input, "BCF or parametrization JSON")->required();
  certify_cmd->add_option("--method", certify_method, "grid | polynomial | both")
      ->check(CLI::IsMember({"grid", "polynomial", "both"}));
  certify_cmd->add_option("--grid-points", cert_config.grid_points, "certification grid size");
  certify_cmd->add_option("--grid-span", cert_config.grid_span_factor,
                          "grid half-width in units of max |lambda|");
  certify_cmd->add_flag("--export-curves", export_curves, "write alpha(tau) and J(omega) CSVs");
  certify_cmd->add_option("--tau-max", tau_max, "curve export horizon");
  certify_cmd->add_option("--omega-max", omega_max, "curve export bandwidth");

  // build
  auto* build_cmd = app.add_subcommand("build", "construct the pseudomode Lindblad model");
  std::string build_input;
  bool verify = false;
  build_cmd->add_option("--input", build_input, "BCF or parametrization JSON")->required();
  build_cmd->add_flag("--verify", verify, "emit a structural verification report");

  // simulate
  auto* simulate_cmd = app.add_subcommand("simulate", "propagate one engine");
  std::string engine, problem_path, hops_variant;
  int trajectories = 0;
  std::uint64_t seed_override = 0;
  bool seed_given = false;
  int threads = 0;
  simulate_cmd->add_option("engine", engine, "heom | lindblad | hops")
      ->required()
      ->check(CLI::IsMember({"heom", "lindblad", "hops"}));
  simulate_cmd->add_option("--problem", problem_path, "problem JSON")->required();
  simulate_cmd->add_option("--variant", hops_variant, "hops variant override")
      ->check(CLI::IsMember({"linear", "nonlinear", "nuhops"}));
  simulate_cmd->add_option("--trajectories", trajectories, "hops trajectory count override");
  auto* seed_opt = simulate_cmd->add_option("--seed", seed_override, "hops seed override");
  simulate_cmd->add_option("--threads", threads, "trajectory worker cap");
  std::string dump_path;
  simulate_cmd->add_option("--dump-trajectories", dump_path,
                           "also write per-trajectory vacuum components (hops)");

  // compare
  auto* compare_cmd = app.add_subcommand("compare", "cross-check engines");
  std::string compare_problem, engines_csv = "heom,lindblad";
  double threshold = 1e-3;
  compare_cmd->add_option("--problem", compare_problem, "problem JSON")->required();
  compare_cmd->add_option("--engines", engines_csv, "comma-separated engine list");
  compare_cmd->add_option("--threshold", threshold, "max tolerated trace distance");

  // noise-check
  auto* noise_cmd = app.add_subcommand("noise-check", "validate noise statistics");
  std::string noise_input;
  int noise_paths = 100000, noise_steps = 20;
  double noise_dt = 0.05;
  std::uint64_t noise_seed = default_seed();
  noise_cmd->add_option("--input", noise_input, "BCF or parametrization JSON")->required();
  noise_cmd->add_option("--paths", noise_paths, "ensemble size");
  noise_cmd->add_option("--dt", noise_dt, "sampling step");
  noise_cmd->add_option("--steps", noise_steps, "steps per path");
  noise_cmd->add_option("--seed", noise_seed, "RNG seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fit_cmd) return cmd_fit(fit_input, fit_terms, fit_ansatz, fit_config, output_dir);
    if (*certify_cmd)
      return cmd_certify(certify_input, cert_config, certify_method, export_curves, tau_max,
                         omega_max, output_dir);
    if (*build_cmd) return cmd_build(build_input, verify, output_dir);
    if (*simulate_cmd) {
      auto config = io::problem_from_json(io::read_json_file(problem_path));
      if (!hops_variant.empty()) config.hops_variant = hops_variant;
      if (trajectories > 0) config.trajectories = trajectories;
      seed_given = seed_opt->count() > 0;
      if (seed_given)
        config.seed = seed_override;
      else if (!config.seed_from_file)
        config.seed = default_seed();
      if (threads > 0) config.threads = threads;
      return cmd_simulate(engine, problem_path, output_dir, dump_path, std::move(config));
    }
    if (*compare_cmd) {
      auto config = io::problem_from_json(io::read_json_file(compare_problem));
      std::vector<std::string> engines;
      std::stringstream stream(engines_csv);
      std::string token;
      while (std::getline(stream, token, ',' ))
        if (!token.empty()) engines.push_back(token);
      return cmd_compare(engines, threshold, output_dir, std::move(config));
    }
    if (*noise_cmd)
      return cmd_noise_check(noise_input, noise_paths, noise_dt, noise_steps, noise_seed,
                             output_dir);
  } catch (const ConfigError& error) {
    std::cerr << "configuration error: " << error.what() << "\n";
    return 1;
  } catch (const Error& error) {
    std::cerr << "numerical failure: " << error.what() << "\n";
    return 2;
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 2;
  }
  return 1;
}

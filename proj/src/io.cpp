#include "pmh/io.hpp"

#include <Eigen/Eigenvalues>
#include <fstream>
#include <sstream>

#include "pmh/errors.hpp"
#include "pmh/sha256.hpp"

namespace pmh::io {

json complex_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

Complex complex_from_json(const json& j) {
  if (j.is_number()) return Complex(j.get<double>(), 0.0);
  if (!j.is_array() || j.size() != 2)
    throw ConfigError("complex values must be [re, im] pairs");
  return Complex(j[0].get<double>(), j[1].get<double>());
}

json vector_to_json(const ComplexVector& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(complex_to_json(v(i)));
  return out;
}

ComplexVector vector_from_json(const json& j) {
  if (!j.is_array()) throw ConfigError("expected an array of [re, im] pairs");
  ComplexVector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<int>(i)) = complex_from_json(j[i]);
  return v;
}

json matrix_to_json(const ComplexMatrix& m) {
  json out = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
    out.push_back(row);
  }
  return out;
}

ComplexMatrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("expected a nested matrix array");
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j[0].size());
  ComplexMatrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (static_cast<int>(j[r].size()) != cols) throw ConfigError("ragged matrix rows");
    for (int c = 0; c < cols; ++c) m(r, c) = complex_from_json(j[r][c]);
  }
  return m;
}

json bcf_to_json(const ExponentialBCF& bcf) {
  return json{{"lambdas", vector_to_json(bcf.lambdas)},
              {"amplitudes", vector_to_json(bcf.amplitudes)}};
}

ExponentialBCF bcf_from_json(const json& j) {
  ExponentialBCF bcf;
  bcf.lambdas = vector_from_json(j.at("lambdas"));
  bcf.amplitudes = vector_from_json(j.at("amplitudes"));
  if (bcf.lambdas.size() != bcf.amplitudes.size())
    throw ConfigError("lambdas and amplitudes must have equal length");
  return bcf;
}

json parametrization_to_json(const PositiveParametrization& p) {
  return json{{"lambdas", vector_to_json(p.lambdas)},
              {"residues", vector_to_json(p.residues)}};
}

PositiveParametrization parametrization_from_json(const json& j) {
  PositiveParametrization p;
  p.lambdas = vector_from_json(j.at("lambdas"));
  p.residues = vector_from_json(j.at("residues"));
  if (p.lambdas.size() != p.residues.size())
    throw ConfigError("lambdas and residues must have equal length");
  return p;
}

json model_to_json(const PseudomodeModel& model) {
  return json{{"h", matrix_to_json(model.h)},
              {"gamma", matrix_to_json(model.gamma)},
              {"g", vector_to_json(model.g)},
              {"v", matrix_to_json(model.v)},
              {"base_transform", matrix_to_json(model.base_transform)},
              {"c", vector_to_json(model.c)},
              {"lambdas", vector_to_json(model.lambdas)},
              {"coupling_tilde", vector_to_json(model.coupling_tilde)}};
}

PseudomodeModel model_from_json(const json& j) {
  PseudomodeModel model;
  model.h = matrix_from_json(j.at("h"));
  model.gamma = matrix_from_json(j.at("gamma"));
  model.g = vector_from_json(j.at("g"));
  model.v = matrix_from_json(j.at("v"));
  // provenance fields are optional in hand-written model files
  if (j.contains("base_transform")) model.base_transform = matrix_from_json(j["base_transform"]);
  if (j.contains("c")) model.c = vector_from_json(j["c"]);
  if (j.contains("lambdas")) model.lambdas = vector_from_json(j["lambdas"]);
  if (j.contains("coupling_tilde")) model.coupling_tilde = vector_from_json(j["coupling_tilde"]);
  return model;
}

json report_to_json(const PositivityReport& report) {
  json roots = json::array();
  for (const auto& root : report.real_root_multiplicities)
    roots.push_back(json{{"root", complex_to_json(root.root)},
                         {"multiplicity", root.multiplicity}});
  return json{{"is_physical", report.is_physical},
              {"min_spectral_value", report.min_spectral_value},
              {"witness_frequency", report.witness_frequency},
              {"method", report.method},
              {"real_root_multiplicities", roots}};
}

json fit_result_to_json(const FitResult& result) {
  json out{{"ansatz", result.ansatz == FitAnsatz::Physical ? "physical" : "direct"},
           {"bcf", bcf_to_json(result.bcf)},
           {"residual_norm", result.residual_norm},
           {"iterations", result.iterations},
           {"converged", result.converged},
           {"restarts_used", result.restarts_used},
           {"positivity", report_to_json(result.positivity)}};
  if (result.ansatz == FitAnsatz::Physical)
    out["parametrization"] = parametrization_to_json(result.parametrization);
  return out;
}

BCFSamples samples_from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open samples file: " + path);
  std::vector<double> taus, res, ims, weights;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    for (char& ch : line)
      if (ch == ',' || ch == ';' || ch == '\t') ch = ' ';
    std::istringstream fields(line);
    double tau, re, im, weight;
    if (!(fields >> tau >> re >> im)) continue;  // header or malformed line
    taus.push_back(tau);
    res.push_back(re);
    ims.push_back(im);
    if (fields >> weight) weights.push_back(weight);
  }
  if (taus.empty()) throw ConfigError("no samples parsed from " + path);
  if (!weights.empty() && weights.size() != taus.size())
    throw ConfigError("weight column must be present on every row or absent");
  BCFSamples samples;
  const int m = static_cast<int>(taus.size());
  samples.taus = Eigen::Map<RealVector>(taus.data(), m);
  samples.values = ComplexVector(m);
  for (int i = 0; i < m; ++i) samples.values(i) = Complex(res[i], ims[i]);
  if (!weights.empty()) samples.weights = Eigen::Map<RealVector>(weights.data(), m);
  samples.validate();
  return samples;
}

BCFSamples samples_from_json(const json& j) {
  BCFSamples samples;
  const auto& taus = j.at("taus");
  samples.taus = RealVector(taus.size());
  for (std::size_t i = 0; i < taus.size(); ++i)
    samples.taus(static_cast<int>(i)) = taus[i].get<double>();
  samples.values = vector_from_json(j.at("values"));
  if (j.contains("weights")) {
    const auto& w = j["weights"];
    samples.weights = RealVector(w.size());
    for (std::size_t i = 0; i < w.size(); ++i)
      samples.weights(static_cast<int>(i)) = w[i].get<double>();
  }
  samples.validate();
  return samples;
}

BCFSamples load_samples(const std::string& path) {
  if (path.size() > 5 && path.substr(path.size() - 5) == ".json")
    return samples_from_json(read_json_file(path));
  return samples_from_csv(path);
}

ExponentialBCF ProblemConfig::effective_bcf() const {
  if (bcf) return *bcf;
  if (parametrization) return amplitudes_from_residues(*parametrization);
  throw ConfigError("this operation needs a bath given as a bcf or parametrization");
}

PositiveParametrization ProblemConfig::effective_parametrization() const {
  if (parametrization) return *parametrization;
  if (bcf) return spectral_factorization(*bcf);
  throw ConfigError("this operation needs a bcf or parametrization bath");
}

ComplexVector ProblemConfig::initial_pure_state() const {
  if (psi0) return *psi0;
  // accept rho0 of the form |psi><psi| (rank one)
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(rho0);
  const auto& eigenvalues = solver.eigenvalues();
  int top = 0;
  for (int i = 1; i < eigenvalues.size(); ++i)
    if (eigenvalues(i) > eigenvalues(top)) top = i;
  for (int i = 0; i < eigenvalues.size(); ++i)
    if (i != top && std::abs(eigenvalues(i)) > 1e-10)
      throw ConfigError("trajectory engines need a pure initial state (psi0 or rank-1 rho0)");
  return solver.eigenvectors().col(top);
}

ProblemConfig problem_from_json(const json& j) {
  ProblemConfig config;
  const auto& system = j.at("system");
  config.h_sys = matrix_from_json(system.at("h"));
  config.s_op = matrix_from_json(system.at("s"));
  const int d = static_cast<int>(config.h_sys.rows());
  if (config.s_op.rows() != d || config.h_sys.cols() != d || config.s_op.cols() != d)
    throw ConfigError("system operators must be square with matching dimensions");
  if (system.contains("rho0")) {
    config.rho0 = matrix_from_json(system["rho0"]);
  } else {
    config.rho0 = ComplexMatrix::Zero(d, d);
    config.rho0(0, 0) = 1.0;
  }
  if (system.contains("psi0")) config.psi0 = vector_from_json(system["psi0"]);
  if (config.rho0.rows() != d) throw ConfigError("rho0 does not match the system dimension");

  const auto& bath = j.at("bath");
  int bath_specs = 0;
  if (bath.contains("bcf")) {
    config.bcf = bcf_from_json(bath["bcf"]);
    ++bath_specs;
  }
  if (bath.contains("parametrization")) {
    config.parametrization = parametrization_from_json(bath["parametrization"]);
    ++bath_specs;
  }
  if (bath.contains("pseudomode_model")) {
    config.model = model_from_json(bath["pseudomode_model"]);
    ++bath_specs;
  }
  if (bath_specs != 1)
    throw ConfigError("exactly one bath specification must be present, found " +
                      std::to_string(bath_specs));

  const auto& truncation = j.at("truncation");
  if (truncation.contains("mode_caps"))
    config.mode_caps = truncation["mode_caps"].get<std::vector<int>>();
  if (truncation.contains("excitation_cap"))
    config.excitation_cap = truncation["excitation_cap"].get<int>();

  const auto& grid = j.at("time_grid");
  if (grid.contains("times")) {
    config.t_grid = grid["times"].get<std::vector<double>>();
  } else {
    const double t_end = grid.at("t_end").get<double>();
    const int points = grid.at("points").get<int>();
    const double t_start = grid.value("t_start", 0.0);
    if (points < 2 || !(t_end > t_start)) throw ConfigError("bad time grid");
    for (int i = 0; i < points; ++i)
      config.t_grid.push_back(t_start + (t_end - t_start) * i / (points - 1));
  }
  for (std::size_t i = 1; i < config.t_grid.size(); ++i)
    if (!(config.t_grid[i] > config.t_grid[i - 1]))
      throw ConfigError("time grid must be strictly increasing");

  if (j.contains("integrator")) {
    const auto& integ = j["integrator"];
    config.integrator.rtol = integ.value("rtol", config.integrator.rtol);
    config.integrator.atol = integ.value("atol", config.integrator.atol);
    config.integrator.fixed_step = integ.value("fixed_step", false);
    config.integrator.dt = integ.value("dt", config.integrator.dt);
  }
  if (j.contains("hops")) {
    const auto& hops = j["hops"];
    config.hops_variant = hops.value("variant", config.hops_variant);
    if (config.hops_variant != "linear" && config.hops_variant != "nonlinear" &&
        config.hops_variant != "nuhops")
      throw ConfigError("hops.variant must be linear, nonlinear or nuhops");
    config.trajectories = hops.value("trajectories", config.trajectories);
    config.seed = hops.value("seed", config.seed);
    config.seed_from_file = hops.contains("seed");
    config.hops_dt = hops.value("dt", config.hops_dt);
    config.hops_adaptive = hops.value("adaptive", config.hops_adaptive);
    config.threads = hops.value("threads", config.threads);
  }
  return config;
}

json problem_to_json(const ProblemConfig& config) {
  json system{{"h", matrix_to_json(config.h_sys)},
              {"s", matrix_to_json(config.s_op)},
              {"rho0", matrix_to_json(config.rho0)}};
  if (config.psi0) system["psi0"] = vector_to_json(*config.psi0);
  json bath;
  if (config.bcf) bath["bcf"] = bcf_to_json(*config.bcf);
  if (config.parametrization)
    bath["parametrization"] = parametrization_to_json(*config.parametrization);
  if (config.model) bath["pseudomode_model"] = model_to_json(*config.model);
  json truncation;
  if (!config.mode_caps.empty()) truncation["mode_caps"] = config.mode_caps;
  if (config.excitation_cap) truncation["excitation_cap"] = *config.excitation_cap;
  return json{{"system", system},
              {"bath", bath},
              {"truncation", truncation},
              {"time_grid", json{{"times", config.t_grid}}},
              {"integrator",
               json{{"rtol", config.integrator.rtol},
                    {"atol", config.integrator.atol},
                    {"fixed_step", config.integrator.fixed_step},
                    {"dt", config.integrator.dt}}},
              {"hops",
               json{{"variant", config.hops_variant},
                    {"trajectories", config.trajectories},
                    {"seed", config.seed},
                    {"dt", config.hops_dt},
                    {"adaptive", config.hops_adaptive},
                    {"threads", config.threads}}}};
}

std::string canonical_dump(const json& j) {
  // nlohmann::json objects iterate in sorted key order already
  return j.dump();
}

std::string config_hash(const json& resolved) { return sha256_hex(canonical_dump(resolved)); }

void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows, const json* resolved_config) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  if (resolved_config) {
    out << "# config_hash: " << config_hash(*resolved_config) << "\n";
    out << "# resolved_config: " << canonical_dump(*resolved_config) << "\n";
  }
  for (std::size_t c = 0; c < columns.size(); ++c)
    out << columns[c] << (c + 1 < columns.size() ? "," : "\n");
  out.precision(17);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c)
      out << row[c] << (c + 1 < row.size() ? "," : "\n");
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& error) {
    throw ConfigError("failed to parse " + path + ": " + error.what());
  }
  return j;
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << j.dump(2) << "\n";
}

}  // namespace pmh::io

#pragma once

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "pmh/bcf.hpp"
#include "pmh/fit.hpp"
#include "pmh/fock.hpp"
#include "pmh/integrate.hpp"
#include "pmh/pseudomode.hpp"
#include "pmh/types.hpp"

namespace pmh::io {

using nlohmann::json;

// Complex numbers are always serialized as [re, im] pairs; matrices as nested
// row-major arrays of pairs.
json complex_to_json(Complex z);
Complex complex_from_json(const json& j);
json vector_to_json(const ComplexVector& v);
ComplexVector vector_from_json(const json& j);
json matrix_to_json(const ComplexMatrix& m);
ComplexMatrix matrix_from_json(const json& j);

json bcf_to_json(const ExponentialBCF& bcf);
ExponentialBCF bcf_from_json(const json& j);
json parametrization_to_json(const PositiveParametrization& p);
PositiveParametrization parametrization_from_json(const json& j);
json model_to_json(const PseudomodeModel& model);
PseudomodeModel model_from_json(const json& j);
json report_to_json(const PositivityReport& report);
json fit_result_to_json(const FitResult& result);

// Sample ingestion: CSV columns tau, re, im[, weight] (header optional) or a
// JSON object {"taus": [...], "values": [[re,im],...], "weights": [...]}.
BCFSamples samples_from_csv(const std::string& path);
BCFSamples samples_from_json(const json& j);
BCFSamples load_samples(const std::string& path);

// Whole-problem description consumed by the simulate/compare subcommands.
struct ProblemConfig {
  ComplexMatrix h_sys;
  ComplexMatrix s_op;
  ComplexMatrix rho0;                       // defaults to |0><0|
  std::optional<ComplexVector> psi0;        // pure state for trajectory engines
  std::optional<ExponentialBCF> bcf;
  std::optional<PositiveParametrization> parametrization;
  std::optional<PseudomodeModel> model;
  std::vector<int> mode_caps;
  std::optional<int> excitation_cap;
  std::vector<double> t_grid;
  IntegratorConfig integrator;
  // trajectory settings
  std::string hops_variant = "linear";
  int trajectories = 1000;
  std::uint64_t seed = 0;
  bool seed_from_file = false;
  double hops_dt = 2.5e-3;
  bool hops_adaptive = false;
  int threads = 1;

  // The bath in exponential form (factorizing or synthesizing as needed).
  ExponentialBCF effective_bcf() const;
  PositiveParametrization effective_parametrization() const;
  ComplexVector initial_pure_state() const;  // psi0 or throws if rho0 is mixed
};

ProblemConfig problem_from_json(const json& j);
// Round-trips every field that selects behavior; the hash of this document is
// the reproducibility stamp carried by all outputs.
json problem_to_json(const ProblemConfig& config);

std::string canonical_dump(const json& j);  // sorted keys, no whitespace
std::string config_hash(const json& resolved);

// CSV writers; every file starts with '# config_hash: ...' and
// '# resolved_config: ...' comment lines when a config is supplied.
void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows,
               const json* resolved_config = nullptr);

json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const json& j);

}  // namespace pmh::io

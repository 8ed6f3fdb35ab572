#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "pmh/bcf.hpp"
#include "pmh/types.hpp"

namespace pmh {

// Target data for the exponential fits.
struct BCFSamples {
  RealVector taus;       // strictly increasing, taus(0) >= 0
  ComplexVector values;  // alpha(tau_i)
  RealVector weights;    // optional (size 0 = uniform), entries > 0

  int size() const { return static_cast<int>(taus.size()); }
  void validate() const;
};

BCFSamples sample_bcf(const ExponentialBCF& bcf, const RealVector& taus);

struct FitConfig {
  int restarts = 16;
  int max_iterations = 500;
  double objective_rtol = 1e-12;
  double gradient_tol = 1e-10;
  std::uint64_t seed = 0;
  double tail_weight_rate = 0.0;  // w_i *= exp(-rate * tau_i); negative = tail emphasis
  bool prony_init = false;        // Prony pre-pass for the first restart (uniform grids)
};

enum class FitAnsatz { Physical, Direct };

struct FitResult {
  FitAnsatz ansatz = FitAnsatz::Physical;
  PositiveParametrization parametrization;  // populated for the physical ansatz
  ExponentialBCF bcf;                       // derived (physical) or fitted (direct)
  double residual_norm = 0.0;               // weighted sum of squared residuals
  int iterations = 0;
  bool converged = false;
  int restarts_used = 0;
  PositivityReport positivity;
};

// Physicality-preserving fit over (r, lambda) with Re(lambda) = exp(u).
// Throws InvalidN when n_terms < 1; non-convergence is reported through the
// converged flag, never an exception.
FitResult fit_physical(const BCFSamples& samples, int n_terms, const FitConfig& config = {});

// Direct fit over (G, lambda) with sum_j Im(G_j) = 0 enforced by eliminating
// the last imaginary part. The output carries its own positivity report.
FitResult fit_direct(const BCFSamples& samples, int n_terms, const FitConfig& config = {});

struct ComparisonReport {
  std::optional<FitResult> physical;
  std::optional<FitResult> direct;
  std::string physical_error;  // non-empty when that arm threw
  std::string direct_error;
  int raw_parameter_count = 0;        // 4N real parameters in both ansaetze
  int physical_effective_count = 0;   // minus the global phase of r
  int direct_effective_count = 0;     // minus the hermiticity elimination
};

// Runs both fits with identical budgets; one arm failing does not abort the
// other.
ComparisonReport compare_ansatz(const BCFSamples& samples, int n_terms,
                                const FitConfig& config = {});

}  // namespace pmh

#pragma once

#include <vector>

#include "pmh/fock.hpp"
#include "pmh/integrate.hpp"
#include "pmh/pseudomode.hpp"
#include "pmh/types.hpp"

namespace pmh {

struct LindbladProblem {
  ComplexMatrix h_sys;
  ComplexMatrix s_op;
  PseudomodeModel model;
  HilbertLayout layout;  // system (x) pseudomodes
};

// Precomputed Lindblad action: H = H_sys + S (x) sum_k (g_k^* a_k + g_k a_k^+)
// + sum_kk' h_kk' a_k^+ a_k', dissipators L_k = sum_k' Gamma_kk' a_k'.
class Liouvillian {
 public:
  explicit Liouvillian(const LindbladProblem& problem);

  void apply(const ComplexMatrix& rho, ComplexMatrix& out) const;
  ComplexMatrix apply(const ComplexMatrix& rho) const;

  const HilbertLayout& layout() const { return layout_; }
  // Occupation <a_k^+ a_k> per mode, a truncation diagnostic.
  RealVector mode_occupations(const ComplexMatrix& rho) const;
  double boundary_population(const ComplexMatrix& rho) const;

 private:
  HilbertLayout layout_;
  SparseMatrix hamiltonian_;
  std::vector<SparseMatrix> jump_ops_;       // nontrivial L_k only
  SparseMatrix anticommutator_half_;         // (1/2) sum_k L_k^+ L_k
  std::vector<SparseMatrix> numbers_;
  std::vector<int> boundary_flat_;           // flat indices with a saturated mode
};

Liouvillian build_liouvillian(const LindbladProblem& problem);

struct LindbladConfig {
  IntegratorConfig integrator;
  double boundary_warn_threshold = 1e-4;
};

struct LindbladRun {
  std::vector<double> times;
  std::vector<ComplexMatrix> reduced;        // partial-trace system states
  std::vector<RealVector> occupations;       // per-mode <n_k> at each output
  bool truncation_warning = false;
  double max_boundary_population = 0.0;
  IntegratorStats stats;
};

// CPT evolution from rho_sys(0) (x) |vac><vac|, reduced by partial trace.
LindbladRun propagate_and_reduce(const LindbladProblem& problem, const ComplexMatrix& rho0_sys,
                                 const std::vector<double>& t_grid,
                                 const LindbladConfig& config = {});

// Two-time correlation <A(tau) A^+(0)> of the bare pseudomode environment via
// the quantum regression theorem on the truncated space: evolves A^+|vac><vac|
// under the system-free Liouvillian and traces against A. Validates the model
// BCF on the truncated space, isolating truncation error from model error.
std::vector<Complex> regression_bcf(const PseudomodeModel& model,
                                    const std::vector<int>& mode_caps,
                                    const std::vector<double>& taus,
                                    const IntegratorConfig& config = {});

}  // namespace pmh

#pragma once

#include <vector>

#include "pmh/bcf.hpp"
#include "pmh/fock.hpp"
#include "pmh/integrate.hpp"
#include "pmh/types.hpp"

namespace pmh {

// Hierarchy state: the (generally non-Hermitian) operator on system (x) modes
// whose number-state blocks are the auxiliary matrices. The physical state is
// the vacuum block.
struct HierarchyState {
  ComplexMatrix varrho;
  double time = 0.0;
};

// Precomputed action of the hierarchy generator: unitary part, per-mode
// damping, balanced sqrt(G) couplings and the source terms.
class HEOMGenerator {
 public:
  HEOMGenerator(const ComplexMatrix& h_sys, const ComplexMatrix& s_op,
                const ExponentialBCF& bcf, HilbertLayout layout);

  void apply(const ComplexMatrix& varrho, ComplexMatrix& out) const;
  ComplexMatrix apply(const ComplexMatrix& varrho) const;

  const HilbertLayout& layout() const { return layout_; }
  const ExponentialBCF& bcf() const { return bcf_; }
  const ComplexVector& sqrt_g() const { return sqrt_g_; }

  // Frobenius norm fraction of varrho living on the outermost excitation
  // shell, the truncation diagnostic.
  double boundary_fraction(const ComplexMatrix& varrho) const;

 private:
  HilbertLayout layout_;
  ExponentialBCF bcf_;
  ComplexVector sqrt_g_;
  SparseMatrix h_full_, s_full_;
  std::vector<SparseMatrix> lower_, raise_, number_;
  std::vector<int> boundary_indices_;
};

HEOMGenerator build_generator(const ComplexMatrix& h_sys, const ComplexMatrix& s_op,
                              const ExponentialBCF& bcf, const HilbertLayout& layout);

struct HeomConfig {
  IntegratorConfig integrator;
  double boundary_warn_threshold = 1e-4;
};

struct HeomRun {
  std::vector<HierarchyState> states;
  bool truncation_warning = false;
  double max_boundary_fraction = 0.0;
  IntegratorStats stats;
};

// Propagates from varrho(0) = rho0_sys (x) |vac><vac| and stores the state at
// the requested times.
HeomRun propagate(const HEOMGenerator& generator, const ComplexMatrix& rho0_sys,
                  const std::vector<double>& t_grid, const HeomConfig& config = {});

// Vacuum projection, hermitized; the asymmetry that was removed is reported
// through *defect when non-null.
ComplexMatrix extract_system(const HEOMGenerator& generator, const HierarchyState& state,
                             double* defect = nullptr);

}  // namespace pmh

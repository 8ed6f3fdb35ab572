#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pmh/bcf.hpp"
#include "pmh/fock.hpp"
#include "pmh/integrate.hpp"
#include "pmh/noise.hpp"
#include "pmh/types.hpp"

namespace pmh {

enum class HopsVariant { Linear, Nonlinear, NuHops };

// Precombined sparse operators shared (read-only) by every trajectory.
// drift = -i H - i sum_j sqrt(G_j)(S b_j + S b_j^+) - sum_j lambda_j n_j is the
// full time-independent part of the linear equation and reappears verbatim in
// the near-unitary variant once its Hermitian/anti-Hermitian split is undone.
class HopsOperators {
 public:
  HopsOperators(const ComplexMatrix& h_sys, const ComplexMatrix& s_op,
                const ExponentialBCF& bcf, HilbertLayout layout);

  const HilbertLayout& layout() const { return layout_; }
  const ExponentialBCF& bcf() const { return bcf_; }
  const ComplexMatrix& s_sys() const { return s_sys_; }

  SparseMatrix drift;            // constant generator part
  SparseMatrix s_full;           // S (x) 1
  SparseMatrix displace;         // sum_j sqrt(G_j) (b_j + b_j^+)
  std::vector<SparseMatrix> lower;
  std::vector<RealVector> number_diag;  // diagonal of n_j
  ComplexVector sqrt_g;
  ComplexVector lambdas;
  ComplexVector amplitudes;

  const SparseMatrix& lower_weighted() const { return lower_weighted_; }
  const SparseMatrix& raise_weighted_amp() const { return raise_weighted_amp_; }

 private:
  HilbertLayout layout_;
  ExponentialBCF bcf_;
  ComplexMatrix s_sys_;
  SparseMatrix lower_weighted_;      // sum_j sqrt(G_j) b_j
  SparseMatrix raise_weighted_amp_;  // sum_j G_j b_j^+
};

struct HopsConfig {
  double dt = 2.5e-3;       // integration step; noise is sampled at dt/2
  bool adaptive = false;    // Dormand-Prince with noise interpolation
  double rtol = 1e-9;
  double atol = 1e-9;
  double norm_collapse_tol = 1e-12;  // on ||psi^(0)||^2
  bool record_full_state = false;    // keep full phi (and shifts) at outputs
};

struct TrajectoryState {
  ComplexVector phi;        // empty unless record_full_state
  double time = 0.0;
  ComplexVector nu;         // nuHOPS shift, empty otherwise
  double log_norm = 0.0;    // accumulated rescaling (nonlinear variants)
};

struct Trajectory {
  std::vector<TrajectoryState> states;
  std::vector<ComplexVector> vacuum;   // psi^(0) at every output time
  bool norm_collapsed = false;
  double max_norm_deviation = 0.0;     // nuHOPS: max | ||psi|| - 1 |
  std::vector<double> s_expectation;   // <S> at outputs (nonlinear variants)
  std::vector<RealVector> mean_mode_amplitude;  // |<b_k>| at outputs (diagnostic)
};

Trajectory propagate_linear_hops(const HopsOperators& ops, const NoisePath& noise,
                                 const ComplexVector& psi0_sys,
                                 const std::vector<double>& t_grid, const HopsConfig& config);

Trajectory propagate_nonlinear_hops(const HopsOperators& ops, const NoisePath& noise,
                                    const ComplexVector& psi0_sys,
                                    const std::vector<double>& t_grid,
                                    const HopsConfig& config);

Trajectory propagate_nuhops(const HopsOperators& ops, const NoisePath& noise,
                            const ComplexVector& psi0_sys, const std::vector<double>& t_grid,
                            const HopsConfig& config);

enum class EnsembleMode { Linear, Normalized };

struct EnsembleStats {
  std::vector<ComplexMatrix> mean;      // system density matrix per time
  std::vector<ComplexMatrix> std_error; // entrywise (re, im) standard errors
  int used = 0;
};

// Batch-means reduction of per-trajectory vacuum components.
// Throws InsufficientTrajectories for fewer than two inputs.
EnsembleStats ensemble_average(const std::vector<std::vector<ComplexVector>>& vacuum_series,
                               EnsembleMode mode, int n_batches = 50);

struct HopsProblem {
  ComplexMatrix h_sys;
  ComplexMatrix s_op;
  PositiveParametrization param;  // trajectories need a physical bath
  HilbertLayout layout;
};

struct EnsembleConfig {
  int n_trajectories = 1000;
  std::uint64_t seed = 0;
  int threads = 1;
  double max_excluded_fraction = 0.01;
  int n_batches = 50;
  HopsConfig trajectory;
};

struct EnsembleRun {
  std::vector<double> times;
  EnsembleStats stats;
  int excluded = 0;
  double max_norm_deviation = 0.0;
  double max_mean_mode_amplitude = 0.0;  // max_k |E<b_k>| over times (diagnostic)
};

// Seeds trajectory k with noise stream k; the reduction order is fixed by
// trajectory index, so results do not depend on thread scheduling.
EnsembleRun run_hops_ensemble(const HopsProblem& problem, HopsVariant variant,
                              const ComplexVector& psi0_sys, const std::vector<double>& t_grid,
                              const EnsembleConfig& config);

// All-zero noise path covering n_steps steps of dt (for shift-free fixtures).
NoisePath zero_noise(double dt, int n_steps);

}  // namespace pmh

#pragma once

#include <string>
#include <vector>

#include "pmh/errors.hpp"
#include "pmh/polyroots.hpp"
#include "pmh/types.hpp"

namespace pmh {

// Bath correlation function alpha(tau) = sum_j G_j exp(-lambda_j tau) for
// tau >= 0, extended hermitially to tau < 0. Valid instances have
// Re(lambda_j) > 0, pairwise distinct lambda_j and sum_j Im(G_j) ~ 0.
struct ExponentialBCF {
  ComplexVector lambdas;
  ComplexVector amplitudes;

  int size() const { return static_cast<int>(lambdas.size()); }
  double amplitude_scale() const;   // sum |G_j|
  double hermiticity_defect() const;  // |sum Im G_j|

  // Throws HermiticityViolation / DegenerateLambdas / Error on bad shape.
  void validate(double separation_tol = 1e-9, double hermiticity_rtol = 1e-10) const;
};

// Residue form r, lambda. The derived amplitudes
//   G_j = sum_k r_j r_k^* / (lambda_j + lambda_k^*)
// carry a non-negative spectral density by construction.
struct PositiveParametrization {
  ComplexVector lambdas;
  ComplexVector residues;

  int size() const { return static_cast<int>(lambdas.size()); }
  void validate(double separation_tol = 1e-9) const;
};

Complex eval_bcf(const ExponentialBCF& bcf, double tau);

// Closed form J(omega) = 2 Re sum_j G_j / (lambda_j - i omega).
double eval_spectral_density(const ExponentialBCF& bcf, double omega);

ExponentialBCF amplitudes_from_residues(const PositiveParametrization& p);

enum class CertMethod { Grid, PolynomialRoots, Both };

struct CertConfig {
  CertMethod method = CertMethod::Both;
  double grid_span_factor = 50.0;  // grid covers [-f*max|lambda|, f*max|lambda|]
  int grid_points = 100000;
  double cluster_rtol = 1e-8;     // root cluster radius 1e-8*(1+|root|)
  double real_axis_rtol = 1e-7;   // root is real if |Im| < 1e-7*(1+|Re|)
  double hermiticity_rtol = 1e-10;
  double negativity_rtol = 1e-10;  // J >= -rtol * max J counts as non-negative
  double separation_tol = 1e-9;
};

struct RootMultiplicity {
  Complex root;
  int multiplicity = 0;
};

struct PositivityReport {
  bool is_physical = false;
  double min_spectral_value = 0.0;
  double witness_frequency = 0.0;
  std::string method;  // "grid" or "polynomial-roots"
  std::vector<RootMultiplicity> real_root_multiplicities;
};

// Certifies J >= 0. The polynomial method builds the numerator polynomial of
// J = P/Q, takes companion-matrix roots, clusters them and demands even
// multiplicity for every real cluster plus a positive leading coefficient.
// The grid method scans a wide frequency grid. With CertMethod::Both the
// polynomial verdict decides and the grid minimum/witness are recorded.
PositivityReport certify_positivity(const ExponentialBCF& bcf, const CertConfig& config = {});

// J = |v|^2 factorization. Picks half of each even real-root multiplicity and
// the upper-half-plane roots of the numerator, fixes the scale constant real
// positive by probing J at one frequency, and reads residues off the partial
// fraction decomposition of v.
PositiveParametrization spectral_factorization(const ExponentialBCF& bcf,
                                               const CertConfig& config = {});

// True iff |sum_j r_j| < tol: a chain geometry with only the terminal,
// system-decoupled mode damped is compatible with this factorization.
bool chain_feasibility(const PositiveParametrization& p, double tol = 1e-10);

namespace detail {
// Numerator polynomial P(omega) of J = P/Q over the common denominator
// Q = prod_j |lambda_j - i omega|^2 (real ascending coefficients).
poly::Poly spectral_numerator(const ExponentialBCF& bcf);
}  // namespace detail

}  // namespace pmh

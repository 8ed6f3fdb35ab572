#pragma once

#include "pmh/bcf.hpp"
#include "pmh/types.hpp"

namespace pmh {

// Multivariate Ornstein-Uhlenbeck process dz = -M z dt + B dW with complex
// white noise. For the diagonal construction M = diag(lambda_j) and B is the
// rank-one column c (a single shared white noise channel).
struct OUModel {
  ComplexMatrix drift;      // M, N x N
  ComplexMatrix diffusion;  // B, N x K
  ComplexVector coupling;   // g-tilde, length N
};

// Diagonal process with c_j = r_j / sqrt(G_j) and coupling conj(sqrt(G_j)).
// Throws ZeroAmplitude when a derived G_j vanishes.
OUModel build_diagonal_ou(const PositiveParametrization& p);

// Solves M P + P M^dagger = B B^dagger for the stationary covariance.
// Throws UnstableDrift unless every eigenvalue of M has positive real part.
ComplexMatrix stationary_covariance(const ComplexMatrix& drift, const ComplexMatrix& diffusion);
inline ComplexMatrix stationary_covariance(const OUModel& model) {
  return stationary_covariance(model.drift, model.diffusion);
}

// Closed form P_jk = (B B^dagger)_jk / (lambda_j + lambda_k^*) for diagonal
// drift; used as the fast path and as an independent cross-check of the
// general solver.
ComplexMatrix diagonal_stationary_covariance(const ComplexVector& lambdas,
                                             const ComplexMatrix& diffusion);

// Transformation V = U D^{-1/2} W^dagger with P = W D W^dagger and U the
// unitary (Householder-based) rotation taking D^{-1/2} W^dagger c onto the
// first basis vector, so that exactly one transformed mode is damped.
struct OUTransform {
  ComplexMatrix v;
  ComplexMatrix v_inverse;
  ComplexMatrix base;  // D^{-1/2} W^dagger, the U-free part
};

OUTransform build_transformation(const ComplexMatrix& p, const ComplexVector& c);

// Unitary U with U u = e_1 exactly (u must be unit). Identity when u already
// aligns with e_1 within 1e-12.
ComplexMatrix householder_to_e1(const ComplexVector& u);

}  // namespace pmh

#include "pmh/pseudomode.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <Eigen/SVD>
#include <cmath>

#include "pmh/errors.hpp"

namespace pmh {

ComplexMatrix PseudomodeModel::effective_drift() const {
  return 0.5 * gamma.adjoint() * gamma + kImag * h;
}

namespace {

// Shared assembly once V (and its inverse) are fixed: h from the
// anti-Hermitian part of V Lambda V^{-1}, Gamma^+ = (V c) e_1^+, g from the
// inverse-adjoint transform of the couplings.
PseudomodeModel assemble_with_transform(const PositiveParametrization& p,
                                        const OUModel& ou, const ComplexMatrix& v,
                                        const ComplexMatrix& v_inverse,
                                        const ComplexMatrix& base) {
  const int n = p.size();
  PseudomodeModel model;
  model.lambdas = p.lambdas;
  model.base_transform = base;
  model.c = ou.diffusion.col(0);
  model.coupling_tilde = ou.coupling;
  model.v = v;

  const ComplexMatrix drift_t = v * ComplexMatrix(p.lambdas.asDiagonal()) * v_inverse;
  model.h = (drift_t - drift_t.adjoint()) / (2.0 * kImag);

  const ComplexVector damped = v * model.c;
  model.gamma = ComplexMatrix::Zero(n, n);
  model.gamma.row(0) = damped.adjoint();  // Gamma^+ = (Vc) e_1^+

  model.g = v_inverse.adjoint() * ou.coupling;
  return model;
}

}  // namespace

PseudomodeModel assemble_pseudomode(const PositiveParametrization& p) {
  const OUModel ou = build_diagonal_ou(p);
  const ComplexMatrix cov = diagonal_stationary_covariance(p.lambdas, ou.diffusion);
  const OUTransform transform = build_transformation(cov, ou.diffusion.col(0));
  return assemble_with_transform(p, ou, transform.v, transform.v_inverse, transform.base);
}

Complex analytic_bcf(const PseudomodeModel& model, double tau) {
  const ComplexMatrix propagator = (-model.effective_drift() * tau).exp();
  return model.g.dot(propagator * model.g);  // Eigen dot conjugates the left side
}

PseudomodeModel enumerate_gauge_freedom(const PseudomodeModel& model, const ComplexMatrix& u) {
  const int n = model.size();
  if (u.rows() != n || u.cols() != n) throw ShapeMismatch("gauge unitary has wrong shape");
  if ((u.adjoint() * u - ComplexMatrix::Identity(n, n)).norm() > 1e-10)
    throw NotUnitary("gauge matrix is not unitary");

  PositiveParametrization p;
  p.lambdas = model.lambdas;
  // Residues are recoverable from c and the couplings: r_j = c_j * conj(gt_j).
  p.residues = ComplexVector(n);
  for (int j = 0; j < n; ++j)
    p.residues(j) = model.c(j) * std::conj(model.coupling_tilde(j));

  OUModel ou;
  ou.drift = model.lambdas.asDiagonal();
  ou.diffusion = model.c;
  ou.coupling = model.coupling_tilde;

  const ComplexMatrix v = u * model.base_transform;
  const ComplexMatrix v_inverse = model.base_transform.inverse() * u.adjoint();
  return assemble_with_transform(p, ou, v, v_inverse, model.base_transform);
}

ModelVerification verify_model(const PseudomodeModel& model) {
  ModelVerification out{};
  const int n = model.size();
  const ComplexMatrix drift_t = model.effective_drift();

  out.h_hermiticity_defect =
      (model.h - model.h.adjoint()).norm() / std::max(model.h.norm(), 1e-300);

  const ComplexMatrix v_lambda_vinv =
      model.v * ComplexMatrix(model.lambdas.asDiagonal()) * model.v.inverse();
  out.drift_consistency = (v_lambda_vinv - drift_t).norm();

  const ComplexMatrix gamma_sq = model.gamma.adjoint() * model.gamma;
  out.lyapunov_residual = (drift_t + drift_t.adjoint() - gamma_sq).norm();

  const ComplexMatrix p_t = stationary_covariance(drift_t, model.gamma.adjoint());
  out.stationary_identity = (p_t - ComplexMatrix::Identity(n, n)).norm();

  Eigen::JacobiSVD<ComplexMatrix> svd(model.gamma);
  const auto& sv = svd.singularValues();
  out.gamma_rank_ratio = (n >= 2 && sv(0) > 0.0) ? sv(1) / sv(0) : 0.0;

  const ComplexMatrix vtv = model.v.adjoint() * model.v;
  const ComplexMatrix p_diag =
      diagonal_stationary_covariance(model.lambdas, ComplexMatrix(model.c));
  out.transform_residual = (vtv.inverse() - p_diag).norm();
  return out;
}

}  // namespace pmh

#include "pmh/ou.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "pmh/errors.hpp"

namespace pmh {

OUModel build_diagonal_ou(const PositiveParametrization& p) {
  p.validate();
  const int n = p.size();
  const auto bcf = amplitudes_from_residues(p);
  OUModel model;
  model.drift = p.lambdas.asDiagonal();
  model.diffusion = ComplexMatrix::Zero(n, 1);
  model.coupling = ComplexVector(n);
  const double scale = bcf.amplitude_scale();
  for (int j = 0; j < n; ++j) {
    const Complex g = bcf.amplitudes(j);
    if (std::abs(g) < 1e-14 * std::max(scale, 1.0))
      throw ZeroAmplitude("derived amplitude G_" + std::to_string(j) +
                          " vanishes; the diagonal construction divides by sqrt(G_j)");
    const Complex root = sqrt_principal(g);
    model.diffusion(j, 0) = p.residues(j) / root;
    model.coupling(j) = std::conj(root);
  }
  return model;
}

ComplexMatrix stationary_covariance(const ComplexMatrix& drift, const ComplexMatrix& diffusion) {
  const int n = static_cast<int>(drift.rows());
  if (drift.cols() != n || diffusion.rows() != n)
    throw ShapeMismatch("drift must be square and match the diffusion row count");
  Eigen::ComplexEigenSolver<ComplexMatrix> eigensolver(drift, /*computeEigenvectors=*/false);
  for (int j = 0; j < n; ++j)
    if (!(eigensolver.eigenvalues()(j).real() > 0.0))
      throw UnstableDrift("drift matrix has an eigenvalue with non-positive real part");

  // Vectorized Lyapunov solve: (I (x) M + conj(M) (x) I) vec(P) = vec(B B^+).
  const ComplexMatrix rhs = diffusion * diffusion.adjoint();
  ComplexMatrix system = ComplexMatrix::Zero(n * n, n * n);
  for (int col = 0; col < n; ++col)
    system.block(col * n, col * n, n, n) += drift;
  for (int col = 0; col < n; ++col)
    for (int row = 0; row < n; ++row)
      for (int i = 0; i < n; ++i)
        system(col * n + i, row * n + i) += std::conj(drift(col, row));
  const ComplexVector vec_rhs = Eigen::Map<const ComplexVector>(rhs.data(), n * n);
  const ComplexVector vec_p = system.partialPivLu().solve(vec_rhs);
  ComplexMatrix p = Eigen::Map<const ComplexMatrix>(vec_p.data(), n, n);
  return 0.5 * (p + p.adjoint());  // symmetrize rounding noise
}

ComplexMatrix diagonal_stationary_covariance(const ComplexVector& lambdas,
                                             const ComplexMatrix& diffusion) {
  const int n = static_cast<int>(lambdas.size());
  const ComplexMatrix bb = diffusion * diffusion.adjoint();
  ComplexMatrix p(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      p(j, k) = bb(j, k) / (lambdas(j) + std::conj(lambdas(k)));
  return p;
}

ComplexMatrix householder_to_e1(const ComplexVector& u) {
  const int n = static_cast<int>(u.size());
  ComplexVector e1 = ComplexVector::Zero(n);
  e1(0) = 1.0;
  if ((u - e1).norm() < 1e-12) return ComplexMatrix::Identity(n, n);

  // Rotate the leading phase away so the reflection is exact, then reflect.
  Complex phase = 1.0;
  if (std::abs(u(0)) > 0.0) phase = u(0) / std::abs(u(0));
  const ComplexVector u_aligned = u / phase;
  const ComplexVector v = u_aligned - e1;
  const double v_norm2 = v.squaredNorm();
  ComplexMatrix reflect = ComplexMatrix::Identity(n, n);
  if (v_norm2 > 0.0) reflect -= (2.0 / v_norm2) * (v * v.adjoint());
  return reflect / phase;
}

OUTransform build_transformation(const ComplexMatrix& p, const ComplexVector& c) {
  const int n = static_cast<int>(p.rows());
  if (p.cols() != n || c.size() != n)
    throw ShapeMismatch("covariance must be square and match the coupling length");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eigensolver(p);
  const RealVector eigenvalues = eigensolver.eigenvalues();
  const double max_eig = eigenvalues.maxCoeff();
  if (!(max_eig > 0.0) || eigenvalues.minCoeff() < 1e-12 * max_eig)
    throw SingularP("stationary covariance is numerically singular");

  const ComplexMatrix w = eigensolver.eigenvectors();
  const RealVector inv_sqrt = eigenvalues.cwiseSqrt().cwiseInverse();
  OUTransform transform;
  transform.base = inv_sqrt.asDiagonal() * ComplexMatrix(w.adjoint());

  const ComplexVector target = transform.base * c;
  const double target_norm = target.norm();
  ComplexMatrix u = ComplexMatrix::Identity(n, n);
  if (target_norm > 0.0) u = householder_to_e1(target / target_norm);
  transform.v = u * transform.base;
  // V^{-1} = W D^{1/2} U^dagger, cheap and well conditioned.
  const RealVector sqrt_eigs = eigenvalues.cwiseSqrt();
  transform.v_inverse = ComplexMatrix(w) * sqrt_eigs.asDiagonal() * u.adjoint();
  return transform;
}

}  // namespace pmh

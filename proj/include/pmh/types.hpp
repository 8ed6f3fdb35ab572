#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <complex>

namespace pmh {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<Complex>;

inline constexpr Complex kImag{0.0, 1.0};

// Principal-branch square root, used for every sqrt(G_j) in the library so
// that hierarchy couplings, diffusion vectors and pseudomode couplings share
// one branch convention.
inline Complex sqrt_principal(Complex z) { return std::sqrt(z); }

inline double hermiticity_defect(const ComplexMatrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline ComplexMatrix hermitize(const ComplexMatrix& m) {
  return 0.5 * (m + m.adjoint());
}

// Trace distance (1/2) * ||a - b||_1 for Hermitian inputs.
double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b);

}  // namespace pmh

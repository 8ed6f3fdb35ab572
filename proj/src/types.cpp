#include "pmh/types.hpp"

#include <Eigen/Eigenvalues>

namespace pmh {

double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  const ComplexMatrix diff = hermitize(a - b);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(diff);
  return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

}  // namespace pmh

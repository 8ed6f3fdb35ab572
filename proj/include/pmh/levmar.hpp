#pragma once

#include <functional>
#include <vector>

#include "pmh/types.hpp"

namespace pmh {

// Fills residuals (and, when requested, the Jacobian d residual / d x).
using ResidualFn =
    std::function<void(const RealVector& x, RealVector& residuals, RealMatrix* jacobian)>;

struct LevMarOptions {
  int max_iterations = 500;
  double objective_rtol = 1e-12;  // relative decrease per accepted step
  double gradient_tol = 1e-10;    // infinity norm of J^T r
  double initial_damping = 1e-3;
};

struct LevMarResult {
  RealVector x;
  double objective = 0.0;  // sum of squared residuals
  int iterations = 0;
  bool converged = false;
};

// Damped normal equations with Marquardt diagonal scaling; only strictly
// decreasing steps are accepted, so the objective trace is monotone.
LevMarResult levenberg_marquardt(const ResidualFn& fn, RealVector x0,
                                 const LevMarOptions& options = {},
                                 std::vector<double>* objective_trace = nullptr);

}  // namespace pmh

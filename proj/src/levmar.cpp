#include "pmh/levmar.hpp"

#include <Eigen/Cholesky>
#include <cmath>

namespace pmh {

LevMarResult levenberg_marquardt(const ResidualFn& fn, RealVector x0,
                                 const LevMarOptions& options,
                                 std::vector<double>* objective_trace) {
  const int n = static_cast<int>(x0.size());
  LevMarResult result;
  result.x = std::move(x0);

  RealVector residuals;
  RealMatrix jacobian;
  fn(result.x, residuals, &jacobian);
  result.objective = residuals.squaredNorm();
  if (objective_trace) objective_trace->push_back(result.objective);

  double damping = options.initial_damping;
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    result.iterations = iter + 1;
    const RealMatrix jtj = jacobian.transpose() * jacobian;
    const RealVector gradient = jacobian.transpose() * residuals;
    if (gradient.cwiseAbs().maxCoeff() < options.gradient_tol) {
      result.converged = true;
      break;
    }

    bool accepted = false;
    for (int attempt = 0; attempt < 40 && !accepted; ++attempt) {
      RealMatrix damped = jtj;
      for (int i = 0; i < n; ++i)
        damped(i, i) += damping * std::max(jtj(i, i), 1e-12);
      const RealVector step = damped.ldlt().solve(-gradient);
      const RealVector candidate = result.x + step;
      RealVector trial_residuals;
      fn(candidate, trial_residuals, nullptr);
      const double trial_objective = trial_residuals.squaredNorm();
      if (trial_objective < result.objective) {
        const double decrease = result.objective - trial_objective;
        result.x = candidate;
        result.objective = trial_objective;
        if (objective_trace) objective_trace->push_back(result.objective);
        fn(result.x, residuals, &jacobian);
        damping = std::max(damping / 3.0, 1e-14);
        accepted = true;
        if (decrease < options.objective_rtol * std::max(result.objective, 1e-300)) {
          result.converged = true;
          return result;
        }
      } else {
        damping *= 4.0;
        if (damping > 1e14) break;
      }
    }
    if (!accepted) {
      // no decreasing step found at any damping: local minimum to precision
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace pmh

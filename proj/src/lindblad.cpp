#include "pmh/lindblad.hpp"

#include <cmath>

#include "pmh/errors.hpp"

namespace pmh {

Liouvillian::Liouvillian(const LindbladProblem& problem) : layout_(problem.layout) {
  const int n = problem.model.size();
  if (layout_.n_modes() != n)
    throw ShapeMismatch("layout mode count must equal the pseudomode count");
  const int d_sys = layout_.system_dim();
  if (problem.h_sys.rows() != d_sys || problem.s_op.rows() != d_sys)
    throw ShapeMismatch("system operators do not match the layout");

  std::vector<SparseMatrix> lower(n), raise(n);
  for (int k = 0; k < n; ++k) {
    lower[k] = mode_lowering(layout_, k).mat;
    raise[k] = mode_raising(layout_, k).mat;
    numbers_.push_back(mode_number(layout_, k).mat);
  }

  SparseMatrix coupling(layout_.dim(), layout_.dim());
  for (int k = 0; k < n; ++k) {
    coupling += SparseMatrix(std::conj(problem.model.g(k)) * lower[k]) +
                SparseMatrix(problem.model.g(k) * raise[k]);
  }
  const SparseMatrix s_full = embed_system_operator(layout_, problem.s_op).mat;
  hamiltonian_ = embed_system_operator(layout_, problem.h_sys).mat;
  hamiltonian_ += SparseMatrix(s_full * coupling);
  for (int k = 0; k < n; ++k)
    for (int kp = 0; kp < n; ++kp) {
      const Complex h_kk = problem.model.h(k, kp);
      if (h_kk != Complex(0.0, 0.0))
        hamiltonian_ += SparseMatrix(h_kk * SparseMatrix(raise[k] * lower[kp]));
    }

  anticommutator_half_ = SparseMatrix(layout_.dim(), layout_.dim());
  for (int k = 0; k < n; ++k) {
    if (problem.model.gamma.row(k).norm() == 0.0) continue;
    SparseMatrix jump(layout_.dim(), layout_.dim());
    for (int kp = 0; kp < n; ++kp) {
      const Complex coeff = problem.model.gamma(k, kp);
      if (coeff != Complex(0.0, 0.0)) jump += SparseMatrix(coeff * lower[kp]);
    }
    anticommutator_half_ += SparseMatrix(0.5 * SparseMatrix(jump.adjoint() * jump));
    jump_ops_.push_back(std::move(jump));
  }

  for (int m = 0; m < layout_.mode_dim(); ++m) {
    bool saturated = false;
    for (int k = 0; k < n; ++k)
      if (layout_.tuples()[m][k] == layout_.mode_caps()[k]) saturated = true;
    if (saturated)
      for (int s = 0; s < d_sys; ++s) boundary_flat_.push_back(layout_.flat_index(m, s));
  }
}

void Liouvillian::apply(const ComplexMatrix& rho, ComplexMatrix& out) const {
  if (rho.rows() != layout_.dim() || rho.cols() != layout_.dim())
    throw ShapeMismatch("state does not match the layout");
  out.noalias() = Complex(0, -1) * (hamiltonian_ * rho);
  out.noalias() += Complex(0, 1) * (rho * hamiltonian_);
  ComplexMatrix work(rho.rows(), rho.cols());
  for (const auto& jump : jump_ops_) {
    work.noalias() = jump * rho;
    out.noalias() += work * SparseMatrix(jump.adjoint());
  }
  out.noalias() -= anticommutator_half_ * rho;
  out.noalias() -= rho * anticommutator_half_;
}

ComplexMatrix Liouvillian::apply(const ComplexMatrix& rho) const {
  ComplexMatrix out(rho.rows(), rho.cols());
  apply(rho, out);
  return out;
}

RealVector Liouvillian::mode_occupations(const ComplexMatrix& rho) const {
  RealVector out(static_cast<int>(numbers_.size()));
  for (std::size_t k = 0; k < numbers_.size(); ++k)
    out(static_cast<int>(k)) = (numbers_[k] * rho).trace().real();
  return out;
}

double Liouvillian::boundary_population(const ComplexMatrix& rho) const {
  double acc = 0.0;
  for (int idx : boundary_flat_) acc += rho(idx, idx).real();
  return acc;
}

Liouvillian build_liouvillian(const LindbladProblem& problem) { return Liouvillian(problem); }

LindbladRun propagate_and_reduce(const LindbladProblem& problem, const ComplexMatrix& rho0_sys,
                                 const std::vector<double>& t_grid,
                                 const LindbladConfig& config) {
  const Liouvillian liouvillian(problem);
  const auto& layout = problem.layout;
  const int d_sys = layout.system_dim();
  if (rho0_sys.rows() != d_sys || rho0_sys.cols() != d_sys)
    throw ShapeMismatch("initial state does not match the system dimension");

  ComplexMatrix rho0 = ComplexMatrix::Zero(layout.dim(), layout.dim());
  rho0.topLeftCorner(d_sys, d_sys) = rho0_sys;

  LindbladRun run;
  auto rhs = [&](double, const ComplexMatrix& y, ComplexMatrix& dydt) {
    liouvillian.apply(y, dydt);
  };
  auto observer = [&](int, double t, const ComplexMatrix& y) {
    run.times.push_back(t);
    run.reduced.push_back(partial_trace_modes(layout, y));
    run.occupations.push_back(liouvillian.mode_occupations(y));
    run.max_boundary_population =
        std::max(run.max_boundary_population, liouvillian.boundary_population(y));
  };
  if (config.integrator.fixed_step)
    run.stats = integrate_rk4(rhs, rho0, 0.0, t_grid, observer, config.integrator.dt);
  else
    run.stats = integrate_adaptive(rhs, rho0, 0.0, t_grid, observer, config.integrator);
  run.truncation_warning = run.max_boundary_population > config.boundary_warn_threshold;
  return run;
}

std::vector<Complex> regression_bcf(const PseudomodeModel& model,
                                    const std::vector<int>& mode_caps,
                                    const std::vector<double>& taus,
                                    const IntegratorConfig& integrator) {
  LindbladProblem problem;
  problem.h_sys = ComplexMatrix::Zero(1, 1);
  problem.s_op = ComplexMatrix::Zero(1, 1);
  problem.model = model;
  problem.layout = HilbertLayout(1, mode_caps);
  const Liouvillian liouvillian(problem);
  const auto& layout = problem.layout;

  const int n = model.size();
  std::vector<SparseMatrix> lower(n);
  for (int k = 0; k < n; ++k) lower[k] = mode_lowering(layout, k).mat;

  // X(0) = A^+ |vac><vac| with A = sum_k g_k^* a_k.
  ComplexMatrix x0 = ComplexMatrix::Zero(layout.dim(), layout.dim());
  for (int k = 0; k < n; ++k) {
    std::vector<int> tuple(n, 0);
    tuple[k] = 1;
    const int idx = layout.tuple_index(tuple);
    if (idx >= 0) x0(idx, 0) += model.g(k);
  }

  std::vector<Complex> out(taus.size());
  auto rhs = [&](double, const ComplexMatrix& y, ComplexMatrix& dydt) {
    liouvillian.apply(y, dydt);
  };
  auto observer = [&](int i, double, const ComplexMatrix& y) {
    Complex acc = 0.0;
    for (int k = 0; k < n; ++k)
      acc += std::conj(model.g(k)) * (lower[k] * y).trace();
    out[i] = acc;
  };
  integrate_adaptive(rhs, x0, 0.0, taus, observer, integrator);
  return out;
}

}  // namespace pmh

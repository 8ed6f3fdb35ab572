#include "pmh/heom.hpp"

#include <cmath>

#include "pmh/errors.hpp"

namespace pmh {

HEOMGenerator::HEOMGenerator(const ComplexMatrix& h_sys, const ComplexMatrix& s_op,
                             const ExponentialBCF& bcf, HilbertLayout layout)
    : layout_(std::move(layout)), bcf_(bcf) {
  if (layout_.n_modes() != bcf.size())
    throw ShapeMismatch("layout mode count must equal the number of exponential terms");
  bcf_.validate();
  h_full_ = embed_system_operator(layout_, h_sys).mat;
  s_full_ = embed_system_operator(layout_, s_op).mat;
  const int n = bcf_.size();
  sqrt_g_ = ComplexVector(n);
  lower_.reserve(n);
  raise_.reserve(n);
  number_.reserve(n);
  for (int j = 0; j < n; ++j) {
    sqrt_g_(j) = sqrt_principal(bcf_.amplitudes(j));
    lower_.push_back(mode_lowering(layout_, j).mat);
    raise_.push_back(mode_raising(layout_, j).mat);
    number_.push_back(mode_number(layout_, j).mat);
  }
  // truncation boundary: the outermost excitation shell, or (for box-capped
  // layouts) any tuple with a saturated mode; empty when nothing is truncated
  if (layout_.excitation_cap()) {
    const int cap = *layout_.excitation_cap();
    if (cap > 0)
      for (int m = 0; m < layout_.mode_dim(); ++m)
        if (layout_.total_excitation(m) == cap) boundary_indices_.push_back(m);
  } else {
    for (int m = 0; m < layout_.mode_dim(); ++m) {
      bool saturated = false;
      for (int j = 0; j < layout_.n_modes(); ++j)
        if (layout_.mode_caps()[j] > 0 && layout_.tuples()[m][j] == layout_.mode_caps()[j])
          saturated = true;
      if (saturated) boundary_indices_.push_back(m);
    }
  }
}

void HEOMGenerator::apply(const ComplexMatrix& varrho, ComplexMatrix& out) const {
  if (varrho.rows() != layout_.dim() || varrho.cols() != layout_.dim())
    throw ShapeMismatch("hierarchy state does not match the layout");
  out.noalias() = Complex(0, -1) * (h_full_ * varrho);
  out.noalias() += Complex(0, 1) * (varrho * h_full_);

  ComplexMatrix work(varrho.rows(), varrho.cols());
  for (int j = 0; j < bcf_.size(); ++j) {
    const Complex lam = bcf_.lambdas(j);
    const Complex root = sqrt_g_(j);

    out.noalias() -= lam * (number_[j] * varrho);
    out.noalias() -= std::conj(lam) * (varrho * number_[j]);

    // -i sqrt(G) [S, b rho] and the source -i sqrt(G) S bdag rho
    work.noalias() = lower_[j] * varrho;
    out.noalias() -= (kImag * root) * (s_full_ * work);
    out.noalias() += (kImag * root) * (work * s_full_);
    work.noalias() = raise_[j] * varrho;
    out.noalias() -= (kImag * root) * (s_full_ * work);

    // -i conj(sqrt(G)) [S, rho bdag] and the source +i conj(sqrt(G)) rho b S
    work.noalias() = varrho * raise_[j];
    out.noalias() -= (kImag * std::conj(root)) * (s_full_ * work);
    out.noalias() += (kImag * std::conj(root)) * (work * s_full_);
    work.noalias() = varrho * lower_[j];
    out.noalias() += (kImag * std::conj(root)) * (work * s_full_);
  }
}

ComplexMatrix HEOMGenerator::apply(const ComplexMatrix& varrho) const {
  ComplexMatrix out(varrho.rows(), varrho.cols());
  apply(varrho, out);
  return out;
}

double HEOMGenerator::boundary_fraction(const ComplexMatrix& varrho) const {
  const double total = varrho.norm();
  if (total == 0.0) return 0.0;
  const int d = layout_.system_dim();
  double acc = 0.0;
  for (int m : boundary_indices_) {
    acc += varrho.middleRows(m * d, d).squaredNorm();
    acc += varrho.middleCols(m * d, d).squaredNorm();
  }
  return std::sqrt(acc) / total;
}

HEOMGenerator build_generator(const ComplexMatrix& h_sys, const ComplexMatrix& s_op,
                              const ExponentialBCF& bcf, const HilbertLayout& layout) {
  return HEOMGenerator(h_sys, s_op, bcf, layout);
}

HeomRun propagate(const HEOMGenerator& generator, const ComplexMatrix& rho0_sys,
                  const std::vector<double>& t_grid, const HeomConfig& config) {
  const auto& layout = generator.layout();
  const int d_sys = layout.system_dim();
  if (rho0_sys.rows() != d_sys || rho0_sys.cols() != d_sys)
    throw ShapeMismatch("initial state does not match the system dimension");
  if (hermiticity_defect(rho0_sys) > 1e-10)
    throw Error("initial system state must be Hermitian");
  if (std::abs(rho0_sys.trace().real() - 1.0) > 1e-10)
    throw Error("initial system state must have unit trace");

  ComplexMatrix varrho0 = ComplexMatrix::Zero(layout.dim(), layout.dim());
  varrho0.topLeftCorner(d_sys, d_sys) = rho0_sys;

  HeomRun run;
  run.states.reserve(t_grid.size());
  auto rhs = [&](double, const ComplexMatrix& y, ComplexMatrix& dydt) {
    generator.apply(y, dydt);
  };
  auto observer = [&](int, double t, const ComplexMatrix& y) {
    run.states.push_back({y, t});
    run.max_boundary_fraction =
        std::max(run.max_boundary_fraction, generator.boundary_fraction(y));
  };
  if (config.integrator.fixed_step)
    run.stats = integrate_rk4(rhs, varrho0, t_grid.empty() ? 0.0 : std::min(0.0, t_grid.front()),
                              t_grid, observer, config.integrator.dt);
  else
    run.stats = integrate_adaptive(rhs, varrho0,
                                   t_grid.empty() ? 0.0 : std::min(0.0, t_grid.front()), t_grid,
                                   observer, config.integrator);
  run.truncation_warning = run.max_boundary_fraction > config.boundary_warn_threshold;
  return run;
}

ComplexMatrix extract_system(const HEOMGenerator& generator, const HierarchyState& state,
                             double* defect) {
  const ComplexMatrix root = vacuum_project(generator.layout(), state.varrho);
  if (defect) *defect = hermiticity_defect(root);
  return hermitize(root);
}

}  // namespace pmh

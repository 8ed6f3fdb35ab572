#include "pmh/fock.hpp"

#include <cmath>
#include <numeric>

#include "pmh/errors.hpp"

namespace pmh {

HilbertLayout::HilbertLayout(int system_dim, std::vector<int> mode_caps,
                             std::optional<int> excitation_cap)
    : system_dim_(system_dim), mode_caps_(std::move(mode_caps)), excitation_cap_(excitation_cap) {
  if (system_dim_ < 1) throw ShapeMismatch("system dimension must be >= 1");
  for (int cap : mode_caps_)
    if (cap < 0) throw ShapeMismatch("mode caps must be non-negative");

  radix_.assign(mode_caps_.size() + 1, 1);
  for (std::size_t j = 0; j < mode_caps_.size(); ++j)
    radix_[j + 1] = radix_[j] * (mode_caps_[j] + 1);
  tuple_rank_.assign(radix_.back(), -1);

  // Lexicographic enumeration (vacuum first) of admissible tuples.
  const int n = static_cast<int>(mode_caps_.size());
  std::vector<int> tuple(n, 0);
  while (true) {
    const int total = std::accumulate(tuple.begin(), tuple.end(), 0);
    if (!excitation_cap_ || total <= *excitation_cap_) {
      long rank = 0;
      for (int j = 0; j < n; ++j) rank += tuple[j] * radix_[j];
      tuple_rank_[rank] = static_cast<long>(tuples_.size());
      tuples_.push_back(tuple);
    }
    int j = n - 1;
    while (j >= 0 && tuple[j] == mode_caps_[j]) tuple[j--] = 0;
    if (j < 0) break;
    ++tuple[j];
  }
}

int HilbertLayout::tuple_index(const std::vector<int>& tuple) const {
  if (static_cast<int>(tuple.size()) != n_modes())
    throw ShapeMismatch("tuple length does not match mode count");
  long rank = 0;
  for (int j = 0; j < n_modes(); ++j) {
    if (tuple[j] < 0 || tuple[j] > mode_caps_[j]) return -1;
    rank += tuple[j] * radix_[j];
  }
  const long idx = tuple_rank_[rank];
  return idx < 0 ? -1 : static_cast<int>(idx);
}

int HilbertLayout::total_excitation(int tuple_idx) const {
  const auto& tuple = tuples_.at(tuple_idx);
  return std::accumulate(tuple.begin(), tuple.end(), 0);
}

OperatorMatrix mode_lowering(const HilbertLayout& layout, int mode) {
  if (mode < 0 || mode >= layout.n_modes())
    throw IndexOutOfRange("mode index " + std::to_string(mode) + " out of range");
  const int d_sys = layout.system_dim();
  std::vector<Eigen::Triplet<Complex>> triplets;
  for (int m = 0; m < layout.mode_dim(); ++m) {
    std::vector<int> tuple = layout.tuples()[m];
    if (tuple[mode] == 0) continue;
    const double amp = std::sqrt(static_cast<double>(tuple[mode]));
    tuple[mode] -= 1;
    const int target = layout.tuple_index(tuple);
    if (target < 0) continue;
    for (int s = 0; s < d_sys; ++s)
      triplets.emplace_back(layout.flat_index(target, s), layout.flat_index(m, s), amp);
  }
  OperatorMatrix op{SparseMatrix(layout.dim(), layout.dim()),
                    "b_" + std::to_string(mode)};
  op.mat.setFromTriplets(triplets.begin(), triplets.end());
  return op;
}

OperatorMatrix mode_raising(const HilbertLayout& layout, int mode) {
  OperatorMatrix op = mode_lowering(layout, mode);
  op.mat = SparseMatrix(op.mat.adjoint());
  op.label = "bdag_" + std::to_string(mode);
  return op;
}

OperatorMatrix mode_number(const HilbertLayout& layout, int mode) {
  if (mode < 0 || mode >= layout.n_modes())
    throw IndexOutOfRange("mode index " + std::to_string(mode) + " out of range");
  std::vector<Eigen::Triplet<Complex>> triplets;
  for (int m = 0; m < layout.mode_dim(); ++m) {
    const int n = layout.tuples()[m][mode];
    if (n == 0) continue;
    for (int s = 0; s < layout.system_dim(); ++s) {
      const int idx = layout.flat_index(m, s);
      triplets.emplace_back(idx, idx, static_cast<double>(n));
    }
  }
  OperatorMatrix op{SparseMatrix(layout.dim(), layout.dim()),
                    "n_" + std::to_string(mode)};
  op.mat.setFromTriplets(triplets.begin(), triplets.end());
  return op;
}

OperatorMatrix embed_system_operator(const HilbertLayout& layout, const ComplexMatrix& sys_op) {
  const int d_sys = layout.system_dim();
  if (sys_op.rows() != d_sys || sys_op.cols() != d_sys)
    throw ShapeMismatch("system operator does not match the layout dimension");
  std::vector<Eigen::Triplet<Complex>> triplets;
  for (int m = 0; m < layout.mode_dim(); ++m)
    for (int r = 0; r < d_sys; ++r)
      for (int c = 0; c < d_sys; ++c) {
        if (sys_op(r, c) == Complex(0.0, 0.0)) continue;
        triplets.emplace_back(layout.flat_index(m, r), layout.flat_index(m, c), sys_op(r, c));
      }
  OperatorMatrix op{SparseMatrix(layout.dim(), layout.dim()), "sys(x)1"};
  op.mat.setFromTriplets(triplets.begin(), triplets.end());
  return op;
}

ComplexMatrix partial_trace_modes(const HilbertLayout& layout, const ComplexMatrix& rho) {
  const int d_sys = layout.system_dim();
  if (rho.rows() != layout.dim() || rho.cols() != layout.dim())
    throw ShapeMismatch("state does not match the layout dimension");
  ComplexMatrix out = ComplexMatrix::Zero(d_sys, d_sys);
  for (int m = 0; m < layout.mode_dim(); ++m)
    out += rho.block(m * d_sys, m * d_sys, d_sys, d_sys);
  return out;
}

ComplexMatrix vacuum_project(const HilbertLayout& layout, const ComplexMatrix& rho) {
  const int d_sys = layout.system_dim();
  if (rho.rows() != layout.dim() || rho.cols() != layout.dim())
    throw ShapeMismatch("state does not match the layout dimension");
  return rho.topLeftCorner(d_sys, d_sys);
}

ComplexVector vacuum_component(const HilbertLayout& layout, const ComplexVector& phi) {
  if (phi.size() != layout.dim()) throw ShapeMismatch("state does not match the layout");
  return phi.head(layout.system_dim());
}

}  // namespace pmh

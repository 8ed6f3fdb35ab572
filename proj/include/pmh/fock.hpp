#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pmh/types.hpp"

namespace pmh {

// Truncated system (x) bosonic-modes Hilbert space. Admissible occupation
// tuples satisfy n_j <= mode_caps[j] and, when set, sum_j n_j <= excitation_cap.
// Flat index = tuple_index * system_dim + system_index; the vacuum tuple is
// index 0, so the vacuum block of an operator is its top-left corner.
class HilbertLayout {
 public:
  HilbertLayout() = default;
  HilbertLayout(int system_dim, std::vector<int> mode_caps,
                std::optional<int> excitation_cap = std::nullopt);

  int system_dim() const { return system_dim_; }
  int n_modes() const { return static_cast<int>(mode_caps_.size()); }
  int mode_dim() const { return static_cast<int>(tuples_.size()); }
  int dim() const { return system_dim_ * mode_dim(); }
  const std::vector<int>& mode_caps() const { return mode_caps_; }
  std::optional<int> excitation_cap() const { return excitation_cap_; }

  const std::vector<std::vector<int>>& tuples() const { return tuples_; }
  // -1 when the tuple is outside the truncation.
  int tuple_index(const std::vector<int>& tuple) const;
  int flat_index(int tuple_idx, int system_idx) const {
    return tuple_idx * system_dim_ + system_idx;
  }
  int total_excitation(int tuple_idx) const;

 private:
  int system_dim_ = 1;
  std::vector<int> mode_caps_;
  std::optional<int> excitation_cap_;
  std::vector<std::vector<int>> tuples_;
  std::vector<long> tuple_rank_;  // mixed-radix rank -> tuple index, -1 if absent
  std::vector<long> radix_;
};

// Sparse operator over a HilbertLayout with a provenance label.
struct OperatorMatrix {
  SparseMatrix mat;
  std::string label;
};

// <.., n_j - 1, ..| b_j |.., n_j, ..> = sqrt(n_j); entries leaving the
// truncation are dropped. Throws IndexOutOfRange on a bad mode index.
OperatorMatrix mode_lowering(const HilbertLayout& layout, int mode);
OperatorMatrix mode_raising(const HilbertLayout& layout, int mode);
OperatorMatrix mode_number(const HilbertLayout& layout, int mode);

// sys_op (x) identity on the modes.
OperatorMatrix embed_system_operator(const HilbertLayout& layout, const ComplexMatrix& sys_op);

// Contracts all mode indices: rho_sys[s,s'] = sum_m rho[(m,s),(m,s')].
ComplexMatrix partial_trace_modes(const HilbertLayout& layout, const ComplexMatrix& rho);

// <vac| rho |vac> block.
ComplexMatrix vacuum_project(const HilbertLayout& layout, const ComplexMatrix& rho);

// Vacuum block of a pure state vector.
ComplexVector vacuum_component(const HilbertLayout& layout, const ComplexVector& phi);

}  // namespace pmh

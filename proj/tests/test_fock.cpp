#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unsupported/Eigen/KroneckerProduct>

#include "helpers.hpp"
#include "pmh/fock.hpp"

using namespace pmh;
using namespace pmh::testing;
using doctest::Approx;

TEST_CASE("layout enumerates admissible tuples with inverse index maps") {
  SUBCASE("box caps") {
    HilbertLayout layout(2, {2, 1});
    CHECK(layout.mode_dim() == 6);
    CHECK(layout.dim() == 12);
    for (int m = 0; m < layout.mode_dim(); ++m)
      CHECK(layout.tuple_index(layout.tuples()[m]) == m);
    CHECK(layout.tuples()[0] == std::vector<int>{0, 0});  // vacuum first
  }
  SUBCASE("excitation cap") {
    HilbertLayout layout(3, {8, 8}, 8);
    CHECK(layout.mode_dim() == 45);  // C(10, 2) admissible tuples
    for (int m = 0; m < layout.mode_dim(); ++m) {
      CHECK(layout.total_excitation(m) <= 8);
      CHECK(layout.tuple_index(layout.tuples()[m]) == m);
    }
    CHECK(layout.tuple_index({5, 4}) == -1);  // outside the cap
  }
  SUBCASE("zero modes") {
    HilbertLayout layout(2, {});
    CHECK(layout.mode_dim() == 1);
    CHECK(layout.dim() == 2);
  }
}

TEST_CASE("excitation-cap layout agrees with the box layout inside the cap") {
  HilbertLayout boxed(1, {3, 3});
  HilbertLayout capped(1, {3, 3}, 3);
  for (int m = 0; m < capped.mode_dim(); ++m) {
    const auto& tuple = capped.tuples()[m];
    CHECK(boxed.tuple_index(tuple) >= 0);
  }
  // operators agree on states within the cap
  const auto b_box = mode_lowering(boxed, 0);
  const auto b_cap = mode_lowering(capped, 0);
  for (int m = 0; m < capped.mode_dim(); ++m) {
    ComplexVector state_cap = ComplexVector::Zero(capped.dim());
    state_cap(m) = 1.0;
    ComplexVector state_box = ComplexVector::Zero(boxed.dim());
    state_box(boxed.tuple_index(capped.tuples()[m])) = 1.0;
    const ComplexVector lowered_cap = b_cap.mat * state_cap;
    const ComplexVector lowered_box = b_box.mat * state_box;
    for (int t = 0; t < capped.mode_dim(); ++t) {
      const int box_idx = boxed.tuple_index(capped.tuples()[t]);
      CHECK(std::abs(lowered_cap(t) - lowered_box(box_idx)) < 1e-15);
    }
  }
}

TEST_CASE("single-mode ladder operator matches the textbook matrix") {
  HilbertLayout layout(1, {2});
  const auto b = mode_lowering(layout, 0);
  ComplexMatrix dense = ComplexMatrix(b.mat);
  CHECK(dense(0, 1).real() == Approx(1.0));
  CHECK(dense(1, 2).real() == Approx(std::sqrt(2.0)));
  CHECK(dense.cwiseAbs().sum() == Approx(1.0 + std::sqrt(2.0)));
  CHECK(b.label == "b_0");
}

TEST_CASE("ladder commutator is the identity inside the truncation") {
  HilbertLayout layout(2, {4, 3});
  for (int mode = 0; mode < 2; ++mode) {
    const auto b = mode_lowering(layout, mode);
    const auto bdag = mode_raising(layout, mode);
    const ComplexMatrix comm = ComplexMatrix(b.mat * bdag.mat - bdag.mat * b.mat);
    for (int m = 0; m < layout.mode_dim(); ++m) {
      if (layout.tuples()[m][mode] >= layout.mode_caps()[mode]) continue;  // boundary shell
      for (int s = 0; s < layout.system_dim(); ++s) {
        const int idx = layout.flat_index(m, s);
        CHECK(std::abs(comm(idx, idx) - Complex(1.0, 0.0)) < 1e-14);
      }
    }
  }
  // cross-mode commutators vanish identically
  const auto b0 = mode_lowering(layout, 0);
  const auto b1dag = mode_raising(layout, 1);
  CHECK(ComplexMatrix(b0.mat * b1dag.mat - b1dag.mat * b0.mat).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("two-mode lowering equals an explicit Kronecker construction") {
  // caps (1, 1), system dimension 1; layout order is lexicographic in
  // (n_0, n_1) so mode 1 is the fast index.
  HilbertLayout layout(1, {1, 1});
  ComplexMatrix b_single(2, 2);
  b_single << 0.0, 1.0, 0.0, 0.0;
  const ComplexMatrix id2 = ComplexMatrix::Identity(2, 2);
  const ComplexMatrix b0_kron = Eigen::kroneckerProduct(b_single, id2);
  const ComplexMatrix b1_kron = Eigen::kroneckerProduct(id2, b_single);
  CHECK((ComplexMatrix(mode_lowering(layout, 0).mat) - b0_kron).norm() < 1e-15);
  CHECK((ComplexMatrix(mode_lowering(layout, 1).mat) - b1_kron).norm() < 1e-15);
}

TEST_CASE("embed, partial trace and vacuum projection") {
  HilbertLayout layout(2, {2});
  ComplexMatrix rho_sys(2, 2);
  rho_sys << Complex(0.6, 0.0), Complex(0.1, 0.2), Complex(0.1, -0.2), Complex(0.4, 0.0);

  SUBCASE("product state with vacuum modes") {
    ComplexMatrix rho = ComplexMatrix::Zero(layout.dim(), layout.dim());
    rho.topLeftCorner(2, 2) = rho_sys;
    CHECK((partial_trace_modes(layout, rho) - rho_sys).norm() < 1e-15);
    CHECK((vacuum_project(layout, rho) - rho_sys).norm() < 1e-15);
  }
  SUBCASE("product state with one excitation distinguishes the readouts") {
    ComplexMatrix rho = ComplexMatrix::Zero(layout.dim(), layout.dim());
    rho.block(2, 2, 2, 2) = rho_sys;  // modes in |1><1|
    CHECK((partial_trace_modes(layout, rho) - rho_sys).norm() < 1e-15);
    CHECK(vacuum_project(layout, rho).norm() == 0.0);
  }
  SUBCASE("random state: trace preserved, vacuum projection is a compression") {
    RngStream rng(1, 2);
    ComplexMatrix rho(layout.dim(), layout.dim());
    for (int i = 0; i < layout.dim(); ++i)
      for (int j = 0; j < layout.dim(); ++j) rho(i, j) = Complex(rng.gaussian(), rng.gaussian());
    CHECK(std::abs(partial_trace_modes(layout, rho).trace() - rho.trace()) < 1e-12);
    CHECK(vacuum_project(layout, rho).norm() <= rho.norm());
  }
  SUBCASE("shape mismatch rejected") {
    CHECK_THROWS_AS(partial_trace_modes(layout, rho_sys), ShapeMismatch);
    CHECK_THROWS_AS(embed_system_operator(layout, ComplexMatrix::Identity(3, 3)), ShapeMismatch);
  }
}

TEST_CASE("embedded system operator commutes with mode operators") {
  HilbertLayout layout(2, {3, 2}, 4);
  ComplexMatrix sz(2, 2);
  sz << 1.0, 0.0, 0.0, -1.0;
  const auto embedded = embed_system_operator(layout, sz);
  const auto b1 = mode_lowering(layout, 1);
  CHECK(ComplexMatrix(embedded.mat * b1.mat - b1.mat * embedded.mat).cwiseAbs().maxCoeff() ==
        0.0);
}

TEST_CASE("bad mode index raises IndexOutOfRange") {
  HilbertLayout layout(1, {2});
  CHECK_THROWS_AS(mode_lowering(layout, 1), IndexOutOfRange);
  CHECK_THROWS_AS(mode_number(layout, -1), IndexOutOfRange);
}

#pragma once

// Shared fixtures and independent oracles for the test suites. Oracles here
// deliberately avoid the library code paths they are used to check.

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "pmh/bcf.hpp"
#include "pmh/rng.hpp"
#include "pmh/types.hpp"

namespace pmh::testing {

inline ExponentialBCF make_bcf(std::vector<Complex> gs, std::vector<Complex> lambdas) {
  ExponentialBCF bcf;
  bcf.amplitudes = Eigen::Map<ComplexVector>(gs.data(), static_cast<long>(gs.size()));
  bcf.lambdas = Eigen::Map<ComplexVector>(lambdas.data(), static_cast<long>(lambdas.size()));
  return bcf;
}

inline PositiveParametrization make_param(std::vector<Complex> rs, std::vector<Complex> lambdas) {
  PositiveParametrization p;
  p.residues = Eigen::Map<ComplexVector>(rs.data(), static_cast<long>(rs.size()));
  p.lambdas = Eigen::Map<ComplexVector>(lambdas.data(), static_cast<long>(lambdas.size()));
  return p;
}

// Two-mode model with G = (1, 2), lambda = (1+i, 2+i). Physical, but its
// factorization has sum_j r_j != 0, so no chain geometry with a single
// damped terminal mode exists for it.
inline ExponentialBCF chain_obstruction_model() {
  return make_bcf({{1.0, 0.0}, {2.0, 0.0}}, {{1.0, 1.0}, {2.0, 1.0}});
}

// Brute-force grid oracle for min/argmin of a scalar function.
struct GridMin {
  double min_value;
  double argmin;
};

inline GridMin grid_minimum(const std::function<double(double)>& f, double lo, double hi,
                            int points) {
  GridMin out{f(lo), lo};
  for (int i = 1; i < points; ++i) {
    const double x = lo + (hi - lo) * i / (points - 1);
    const double v = f(x);
    if (v < out.min_value) {
      out.min_value = v;
      out.argmin = x;
    }
  }
  return out;
}

// Random physical parametrization with well-separated rates, the fixture
// generator used by the property tests and the acceptance suite.
inline PositiveParametrization random_parametrization(RngStream& rng, int n) {
  PositiveParametrization p;
  p.lambdas = ComplexVector(n);
  p.residues = ComplexVector(n);
  while (true) {
    for (int j = 0; j < n; ++j) {
      const double re = 0.3 * std::pow(10.0, rng.uniform());  // in [0.3, 3)
      const double im = -3.0 + 6.0 * rng.uniform();
      p.lambdas(j) = Complex(re, im);
      p.residues(j) = Complex(rng.gaussian(), rng.gaussian());
    }
    bool separated = true;
    for (int j = 0; j < n && separated; ++j)
      for (int k = j + 1; k < n; ++k)
        if (std::abs(p.lambdas(j) - p.lambdas(k)) < 0.3) {
          separated = false;
          break;
        }
    if (!separated) continue;
    // keep derived amplitudes away from zero: the diagonal construction
    // divides by sqrt(G_j)
    const auto bcf = amplitudes_from_residues(p);
    bool ok = true;
    for (int j = 0; j < n; ++j)
      if (std::abs(bcf.amplitudes(j)) < 1e-3) ok = false;
    if (ok) return p;
  }
}

inline ComplexMatrix pauli_x() {
  ComplexMatrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}
inline ComplexMatrix pauli_y() {
  ComplexMatrix m(2, 2);
  m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
  return m;
}
inline ComplexMatrix pauli_z() {
  ComplexMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

// Spin-boson benchmark: qubit H = sigma_x / 2 coupled through sigma_z to the
// two-mode interacting bath above.
struct SpinBosonFixture {
  ComplexMatrix h_sys = 0.5 * pauli_x();
  ComplexMatrix s_op = pauli_z();
  ExponentialBCF bcf = chain_obstruction_model();
  ComplexMatrix rho0 = (ComplexMatrix(2, 2) << Complex(1, 0), Complex(0, 0), Complex(0, 0),
                        Complex(0, 0))
                           .finished();
};

// Pure-dephasing benchmark: H = 0, S = sigma_z, single physical mode.
struct DephasingFixture {
  ComplexMatrix h_sys = ComplexMatrix::Zero(2, 2);
  ComplexMatrix s_op = pauli_z();
  ExponentialBCF bcf = make_bcf({{0.5, 0.0}}, {{1.0, 2.0}});
  ComplexMatrix rho0 = (ComplexMatrix(2, 2) << Complex(0.5, 0), Complex(0.5, 0),
                        Complex(0.5, 0), Complex(0.5, 0))
                           .finished();  // |+><+|
};

// Composite-Simpson quadrature on a uniform grid with an even panel count.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
  if (panels % 2 != 0) ++panels;
  const double h = (b - a) / panels;
  double acc = f(a) + f(b);
  for (int i = 1; i < panels; ++i) acc += f(a + i * h) * (i % 2 == 0 ? 2.0 : 4.0);
  return acc * h / 3.0;
}

// Exact pure-dephasing decoherence exponent for S = sigma_z coupling:
// rho_01(t) = rho_01(0) exp(-Phi(t)),  Phi(t) = 2 int_0^t ds int_0^s du 2 Re alpha(u),
// evaluated by double quadrature.
inline double dephasing_exponent(const ExponentialBCF& bcf, double t, int panels = 2000) {
  auto inner = [&](double s) {
    return simpson([&](double u) { return 2.0 * eval_bcf(bcf, u).real(); }, 0.0, s,
                   std::max(8, static_cast<int>(panels * s / std::max(t, 1e-12))));
  };
  return 2.0 * simpson(inner, 0.0, t, panels / 10 * 2);
}

}  // namespace pmh::testing

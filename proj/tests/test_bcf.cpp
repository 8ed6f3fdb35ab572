#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "pmh/bcf.hpp"

using namespace pmh;
using namespace pmh::testing;
using doctest::Approx;

TEST_CASE("eval_bcf matches direct sums and hermitian extension") {
  auto bcf = make_bcf({{1.0, 0.0}, {2.0, 0.0}}, {{1.0, 1.0}, {2.0, 1.0}});
  CHECK(eval_bcf(bcf, 0.0).real() == Approx(3.0));
  CHECK(eval_bcf(bcf, 0.0).imag() == Approx(0.0));

  auto single = make_bcf({{0.5, 0.0}}, {{1.0, 2.0}});
  const Complex expected = 0.5 * std::exp(-1.0) * std::exp(Complex(0.0, -2.0));
  CHECK(std::abs(eval_bcf(single, 1.0) - expected) < 1e-15);
  CHECK(std::abs(eval_bcf(single, -1.0) - std::conj(expected)) < 1e-15);
}

TEST_CASE("eval_bcf hermitian symmetry is exact") {
  auto bcf = chain_obstruction_model();
  for (double tau : {0.0, 0.3, 1.7, 4.2}) {
    const Complex plus = eval_bcf(bcf, tau);
    const Complex minus = eval_bcf(bcf, -tau);
    CHECK(plus.real() == minus.real());
    CHECK(plus.imag() == -minus.imag());
  }
}

TEST_CASE("spectral density of a single Lorentzian") {
  auto single = make_bcf({{0.5, 0.0}}, {{1.0, 2.0}});
  CHECK(eval_spectral_density(single, 2.0) == Approx(1.0));
  CHECK(eval_spectral_density(single, 3.0) == Approx(0.5));
  // closed form 1/(1+(w-2)^2) across a few points
  for (double w : {-3.0, 0.0, 1.5, 2.5, 7.0})
    CHECK(eval_spectral_density(single, w) == Approx(1.0 / (1.0 + (w - 2.0) * (w - 2.0))));
}

TEST_CASE("spectral density rejects hermiticity violations") {
  auto bad = make_bcf({{1.0, 0.5}}, {{1.0, 0.0}});
  CHECK_THROWS_AS(eval_spectral_density(bad, 0.0), HermiticityViolation);
  CHECK_THROWS_AS(bad.validate(), HermiticityViolation);
}

TEST_CASE("validate rejects degenerate or unstable rates") {
  auto degenerate = make_bcf({{1.0, 0.0}, {1.0, 0.0}}, {{1.0, 1.0}, {1.0, 1.0}});
  CHECK_THROWS_AS(degenerate.validate(), DegenerateLambdas);
  auto unstable = make_bcf({{1.0, 0.0}}, {{-1.0, 0.0}});
  CHECK_THROWS_AS(unstable.validate(), Error);
}

TEST_CASE("chain obstruction model is non-negative on a dense grid") {
  auto bcf = chain_obstruction_model();
  const auto scan =
      grid_minimum([&](double w) { return eval_spectral_density(bcf, w); }, -50.0, 50.0, 100001);
  CHECK(scan.min_value >= 0.0);
}

TEST_CASE("certify_positivity: positive single Lorentzian") {
  auto single = make_bcf({{0.5, 0.0}}, {{1.0, 2.0}});
  const auto report = certify_positivity(single);
  CHECK(report.is_physical);
  CHECK(report.method == "polynomial-roots");
  CHECK(report.real_root_multiplicities.empty());
}

TEST_CASE("certify_positivity: sign and witness of an unphysical model agree with grid oracle") {
  auto bcf = make_bcf({{1.0, 0.0}, {-1.0, 0.0}}, {{1.0, 0.0}, {2.0, 0.0}});
  // independent closed form: J(w) = 2/(1+w^2) - 4/(4+w^2)
  auto j_closed = [](double w) { return 2.0 / (1.0 + w * w) - 4.0 / (4.0 + w * w); };
  for (double w : {0.0, 1.0, 2.5, 10.0})
    CHECK(eval_spectral_density(bcf, w) == Approx(j_closed(w)));

  const auto oracle = grid_minimum(j_closed, -100.0, 100.0, 200001);
  CHECK(oracle.min_value < 0.0);

  const auto report = certify_positivity(bcf);
  CHECK_FALSE(report.is_physical);
  CHECK(report.min_spectral_value == Approx(oracle.min_value).epsilon(1e-6));
  CHECK(std::abs(std::abs(report.witness_frequency) - std::abs(oracle.argmin)) < 1e-2);
  CHECK(eval_spectral_density(bcf, report.witness_frequency) < 0.0);

  const auto grid_only = certify_positivity(bcf, {.method = CertMethod::Grid});
  CHECK_FALSE(grid_only.is_physical);
  CHECK(grid_only.method == "grid");
}

TEST_CASE("certify_positivity: chain obstruction model is physical") {
  const auto report = certify_positivity(chain_obstruction_model());
  CHECK(report.is_physical);
  // cross-check against the grid verdict
  const auto grid_only =
      certify_positivity(chain_obstruction_model(), {.method = CertMethod::Grid});
  CHECK(grid_only.is_physical);
}

TEST_CASE("certify_positivity: band-gap model with an even real root") {
  // J proportional to w^2/((1+w^2)(4+w^2)) has a double real zero at w = 0.
  // Residues from the partial fractions of c*w/((1-iw)(2-iw)).
  auto p = make_param({{0.0, -1.0}, {0.0, 2.0}}, {{1.0, 0.0}, {2.0, 0.0}});
  const auto bcf = amplitudes_from_residues(p);
  CHECK(bcf.amplitudes(0).real() < 0.0);  // genuinely complex/negative amplitude model
  const auto report = certify_positivity(bcf);
  CHECK(report.is_physical);
  REQUIRE(report.real_root_multiplicities.size() == 1);
  CHECK(report.real_root_multiplicities[0].multiplicity == 2);
  CHECK(std::abs(report.real_root_multiplicities[0].root) < 1e-6);
}

TEST_CASE("boundary dips flip the verdict only when numerically resolved") {
  // band-gap model (double real root at 0) with the first amplitude pushed
  // down by eps: J(0) = -2 eps
  auto perturbed = [](double eps) {
    auto p = make_param({{0.0, -1.0}, {0.0, 2.0}}, {{1.0, 0.0}, {2.0, 0.0}});
    auto bcf = amplitudes_from_residues(p);
    bcf.amplitudes(0) -= eps;
    return bcf;
  };
  SUBCASE("resolved negative dip certifies unphysical") {
    const auto report = certify_positivity(perturbed(1e-4));
    CHECK_FALSE(report.is_physical);
  }
  SUBCASE("dip below numerical resolution stays a boundary model") {
    const auto report = certify_positivity(perturbed(1e-15));
    CHECK(report.is_physical);
    REQUIRE(report.real_root_multiplicities.size() == 1);
    CHECK(report.real_root_multiplicities[0].multiplicity == 2);
  }
}

TEST_CASE("amplitudes_from_residues: frozen values") {
  auto single = make_param({{1.0, 0.0}}, {{1.0, 2.0}});
  const auto bcf1 = amplitudes_from_residues(single);
  CHECK(bcf1.amplitudes(0).real() == Approx(0.5));
  CHECK(bcf1.amplitudes(0).imag() == Approx(0.0));

  auto two = make_param({{1.0, 0.0}, {1.0, 0.0}}, {{1.0, 0.0}, {2.0, 0.0}});
  const auto bcf2 = amplitudes_from_residues(two);
  CHECK(bcf2.amplitudes(0).real() == Approx(5.0 / 6.0));
  CHECK(bcf2.amplitudes(1).real() == Approx(7.0 / 12.0));
}

TEST_CASE("amplitudes_from_residues always certifies physical") {
  RngStream rng(20260810, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform() * 4.0);
    const auto p = random_parametrization(rng, n);
    const auto bcf = amplitudes_from_residues(p);
    CHECK(bcf.hermiticity_defect() < 1e-10 * bcf.amplitude_scale());
    double max_j = 0.0;
    double min_j = 0.0;
    for (int i = 0; i <= 20000; ++i) {
      const double w = -60.0 + 120.0 * i / 20000.0;
      const double v = eval_spectral_density(bcf, w);
      max_j = std::max(max_j, v);
      min_j = std::min(min_j, v);
    }
    CHECK(min_j >= -1e-10 * max_j);
    CHECK(certify_positivity(bcf).is_physical);
  }
}

TEST_CASE("spectral_factorization: single mode gives unit residue") {
  auto single = make_bcf({{0.5, 0.0}}, {{1.0, 2.0}});
  const auto p = spectral_factorization(single);
  CHECK(std::abs(p.residues(0)) == Approx(1.0));
}

TEST_CASE("spectral_factorization: chain obstruction model") {
  const auto p = spectral_factorization(chain_obstruction_model());
  CHECK(std::abs(p.residues.sum()) > 0.1);
  CHECK_FALSE(chain_feasibility(p));
  // Round trip through the amplitude map.
  const auto bcf = amplitudes_from_residues(p);
  CHECK(std::abs(bcf.amplitudes(0) - Complex(1.0, 0.0)) < 1e-9);
  CHECK(std::abs(bcf.amplitudes(1) - Complex(2.0, 0.0)) < 1e-9);
}

TEST_CASE("spectral_factorization round trip on random physical models") {
  RngStream rng(77, 1);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform() * 5.0);  // N <= 5
    const auto p = random_parametrization(rng, n);
    const auto bcf = amplitudes_from_residues(p);
    const auto p2 = spectral_factorization(bcf);
    const auto bcf2 = amplitudes_from_residues(p2);
    const double scale = bcf.amplitudes.cwiseAbs().maxCoeff();
    CHECK((bcf2.amplitudes - bcf.amplitudes).cwiseAbs().maxCoeff() < 1e-8 * scale);
  }
}

TEST_CASE("spectral_factorization rejects unphysical input") {
  auto bcf = make_bcf({{1.0, 0.0}, {-1.0, 0.0}}, {{1.0, 0.0}, {2.0, 0.0}});
  CHECK_THROWS_AS(spectral_factorization(bcf), NotPhysical);
}

TEST_CASE("chain_feasibility") {
  auto cancel = make_param({{1.0, 0.0}, {-1.0, 0.0}}, {{1.0, 0.0}, {2.0, 0.0}});
  CHECK(chain_feasibility(cancel));
  auto single = make_param({{1.0, 0.0}}, {{1.0, 2.0}});
  CHECK_FALSE(chain_feasibility(single));
}

TEST_CASE("numerator polynomial: leading coefficient cancels under hermiticity") {
  auto bcf = make_bcf({{1.0, 0.7}, {2.0, -0.7}}, {{1.0, 1.0}, {2.0, -1.0}});
  REQUIRE_NOTHROW(bcf.validate());
  const auto num = detail::spectral_numerator(bcf);
  const int n = bcf.size();
  REQUIRE(static_cast<int>(num.size()) == 2 * n);  // raw degree 2N-1 before trimming
  double scale = 0.0;
  for (double c : num) scale = std::max(scale, std::abs(c));
  CHECK(std::abs(num.back()) < 1e-12 * scale);
}

TEST_CASE("Fourier consistency: quadrature of J reproduces the BCF") {
  auto bcf = chain_obstruction_model();
  // alpha(tau) = (1/2pi) int J(w) exp(-i w tau) dw over a wide grid. J decays
  // like C/w^2, so the truncation tail at |w| = W is bounded by ~C/(pi W).
  const double span = 40000.0;
  const long n_panels = 4000000;
  for (double tau : {0.0, 0.5, 1.5}) {
    const double h = 2.0 * span / n_panels;
    Complex acc = 0.0;
    for (long i = 0; i <= n_panels; ++i) {
      const double w = -span + i * h;
      const double weight = (i == 0 || i == n_panels) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      acc += weight * eval_spectral_density(bcf, w) * std::exp(Complex(0.0, -w * tau));
    }
    acc *= h / 3.0 / (2.0 * std::numbers::pi);
    CHECK(std::abs(acc - eval_bcf(bcf, tau)) < 1e-4);
  }
}

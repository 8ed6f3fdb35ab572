#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "pmh/noise.hpp"
#include "pmh/ou.hpp"

using namespace pmh;
using namespace pmh::testing;

namespace {

struct MeanWithError {
  Complex mean;
  double se_re;
  double se_im;
};

MeanWithError reduce(const std::vector<Complex>& values) {
  const double n = static_cast<double>(values.size());
  Complex mean = 0.0;
  for (Complex v : values) mean += v;
  mean /= n;
  double var_re = 0.0, var_im = 0.0;
  for (Complex v : values) {
    var_re += (v.real() - mean.real()) * (v.real() - mean.real());
    var_im += (v.imag() - mean.imag()) * (v.imag() - mean.imag());
  }
  return {mean, std::sqrt(var_re / (n - 1) / n), std::sqrt(var_im / (n - 1) / n)};
}

void check_within(const MeanWithError& est, Complex expected, double sigmas) {
  // a small floor keeps exact-zero expectations from tripping on rounding
  CHECK(std::abs(est.mean.real() - expected.real()) < sigmas * est.se_re + 1e-12);
  CHECK(std::abs(est.mean.imag() - expected.imag()) < sigmas * est.se_im + 1e-12);
}

}  // namespace

TEST_CASE("single-mode noise reproduces the conjugated correlation function") {
  auto p = make_param({{1.0, 0.0}}, {{1.0, 2.0}});  // G = 0.5
  const double dt = 0.05;
  const int n_paths = 30000;
  OUNoiseGenerator generator(p, dt);

  const std::vector<int> probes = {0, 10, 20};  // t = 0, 0.5, 1.0
  std::vector<std::vector<Complex>> corr(probes.size());
  std::vector<Complex> means;
  means.reserve(n_paths);
  for (int path_idx = 0; path_idx < n_paths; ++path_idx) {
    const auto path = generator.sample(20, 1234, path_idx);
    for (std::size_t k = 0; k < probes.size(); ++k)
      corr[k].push_back(path.samples[probes[k]] * std::conj(path.samples[0]));
    means.push_back(path.samples[7]);
  }
  for (std::size_t k = 0; k < probes.size(); ++k) {
    const double t = probes[k] * dt;
    // the path stores z^*, so the estimator carries conj(lambda)
    const Complex expected = 0.5 * std::exp(-Complex(1.0, -2.0) * t);
    check_within(reduce(corr[k]), expected, 4.0);
  }
  check_within(reduce(means), 0.0, 4.0);  // zero-mean process
}

TEST_CASE("non-conjugate correlation vanishes") {
  auto p = make_param({{1.0, 0.0}, {0.5, 0.5}}, {{1.0, 1.0}, {2.0, -1.0}});
  OUNoiseGenerator generator(p, 0.05);
  std::vector<Complex> values;
  for (int path_idx = 0; path_idx < 20000; ++path_idx) {
    const auto path = generator.sample(10, 99, path_idx);
    values.push_back(path.samples[8] * path.samples[2]);
  }
  check_within(reduce(values), 0.0, 4.0);
}

TEST_CASE("two-mode ensemble correlation on a probe grid") {
  const auto p = spectral_factorization(chain_obstruction_model());
  const auto bcf = chain_obstruction_model();
  const double dt = 0.1;
  const int n_paths = 20000, n_steps = 10;
  OUNoiseGenerator generator(p, dt);

  std::vector<std::vector<std::vector<Complex>>> corr(
      n_steps + 1, std::vector<std::vector<Complex>>(n_steps + 1));
  for (int path_idx = 0; path_idx < n_paths; ++path_idx) {
    const auto path = generator.sample(n_steps, 7, path_idx);
    for (int a = 0; a <= n_steps; a += 5)
      for (int b = 0; b <= a; b += 5)
        corr[a][b].push_back(path.samples[a] * std::conj(path.samples[b]));
  }
  for (int a = 0; a <= n_steps; a += 5)
    for (int b = 0; b <= a; b += 5) {
      // E[path_a conj(path_b)] = conj(alpha(t_a - t_b))
      const Complex expected = std::conj(eval_bcf(bcf, (a - b) * dt));
      check_within(reduce(corr[a][b]), expected, 4.0);
    }
}

TEST_CASE("reproducibility: identical keys give identical paths") {
  const auto p = spectral_factorization(chain_obstruction_model());
  const auto a = generate_noise(p, 0.01, 50, 42, 3);
  const auto b = generate_noise(p, 0.01, 50, 42, 3);
  const auto c = generate_noise(p, 0.01, 50, 42, 4);
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) CHECK(a.samples[i] == b.samples[i]);
  bool any_different = false;
  for (std::size_t i = 0; i < a.samples.size(); ++i)
    if (a.samples[i] != c.samples[i]) any_different = true;
  CHECK(any_different);
  CHECK(a.generator == "exact-ou/mt19937_64/box-muller");
}

TEST_CASE("degenerate inputs are rejected") {
  // r tuned so the second derived amplitude vanishes
  auto p = make_param({{1.0, 0.0}, {-4.0 / 3.0, 0.0}}, {{1.0, 0.0}, {2.0, 0.0}});
  CHECK_THROWS_AS(generate_noise(p, 0.01, 10, 0, 0), ZeroAmplitude);
  auto ok = make_param({{1.0, 0.0}}, {{1.0, 0.0}});
  CHECK_THROWS_AS(generate_noise(ok, -0.1, 10, 0, 0), Error);
}

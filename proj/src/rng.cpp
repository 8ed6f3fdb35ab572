#include "pmh/rng.hpp"

#include <cmath>
#include <numbers>

namespace pmh {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream) {
  std::uint64_t mix = seed;
  std::uint64_t a = splitmix64(mix);
  mix ^= 0x6a09e667f3bcc909ULL + stream * 0x9e3779b97f4a7c15ULL;
  std::uint64_t b = splitmix64(mix);
  engine_.seed(a ^ (b + 0x2545f4914f6cdd1dULL));
}

double RngStream::uniform() {
  // 53-bit mantissa from the top bits of one 64-bit draw.
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::gaussian() {
  if (have_cached_) {
    have_cached_ = false;
    return cached_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_ = radius * std::sin(angle);
  have_cached_ = true;
  return radius * std::cos(angle);
}

Complex RngStream::complex_gaussian() {
  constexpr double kInvSqrt2 = 0.7071067811865476;
  const double re = gaussian();
  const double im = gaussian();
  return Complex(re * kInvSqrt2, im * kInvSqrt2);
}

}  // namespace pmh

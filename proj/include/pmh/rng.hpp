#pragma once

#include <cstdint>
#include <random>

#include "pmh/types.hpp"

namespace pmh {

// Deterministic random stream keyed by (seed, stream). Trajectory-level code
// derives one stream per trajectory index so that thread scheduling cannot
// change results. Gaussian variates use an explicit Box-Muller transform:
// std::normal_distribution is implementation-defined and would break
// regeneration guarantees across standard libraries.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream);

  double uniform();   // [0, 1)
  double gaussian();  // standard normal
  // Proper complex Gaussian: E[w] = 0, E[|w|^2] = 1, E[w^2] = 0.
  Complex complex_gaussian();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
  std::mt19937_64 engine_;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace pmh

#pragma once

#include <cstdint>
#include <limits>
#include <random>

#include "netbf/types.hpp"

namespace netbf {

/// (seed, stream) pair naming an independent random sub-stream. Monte Carlo
/// trial t always uses stream t, so results do not depend on scheduling.
struct RngSeed {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

namespace detail {
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}
}  // namespace detail

/// SplitMix64 generator keyed by (seed, stream). Cheap to construct, so one
/// engine per trial is fine.
class StreamEngine {
 public:
  using result_type = std::uint64_t;

  explicit StreamEngine(RngSeed s)
      : state_(detail::mix64(detail::mix64(s.seed ^ 0x6A09E667F3BCC909ULL) + detail::mix64(s.stream + 0x3C6EF372FE94F82BULL))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return detail::mix64(state_);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

/// Circularly-symmetric complex Gaussian source with E|z|^2 = 1.
class ComplexGaussian {
 public:
  cplx operator()(StreamEngine& eng) { return {normal_(eng), normal_(eng)}; }

 private:
  std::normal_distribution<double> normal_{0.0, 0.70710678118654752440};
};

}  // namespace netbf

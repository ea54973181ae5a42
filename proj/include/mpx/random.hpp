#pragma once

#include <cstdint>
#include <random>

namespace mpx {

/// Seedable deterministic generator. The uniform and gaussian draws are
/// built directly on the mt19937_64 output stream (no std::*_distribution)
/// so sequences are bit-reproducible across platforms and the number of
/// engine steps per draw is fixed: uniform consumes one, gaussian two.
class RandomSource {
 public:
  explicit RandomSource(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1), 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Normal(0, sigma) via Box-Muller; exactly two engine steps.
  double gaussian(double sigma);

  /// Uniform integer in [0, n).
  uint64_t below(uint64_t n);

 private:
  std::mt19937_64 engine_;
};

} // namespace mpx

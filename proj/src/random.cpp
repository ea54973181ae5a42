#include "mpx/random.hpp"

#include <cmath>

namespace mpx {

double RandomSource::gaussian(double sigma) {
  // Box-Muller. u1 shifted away from 0 so the log is finite.
  double u1 = 1.0 - uniform();
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  return sigma * r * std::cos(2.0 * M_PI * u2);
}

uint64_t RandomSource::below(uint64_t n) {
  return next_u64() % n; // modulo bias < n/2^64, callers keep n tiny
}

} // namespace mpx

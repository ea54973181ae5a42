#include "mpx/fixed_point.hpp"

#include <cmath>

namespace mpx {

namespace {

void require_same_format(const FixedValue& a, const FixedValue& b, const char* op) {
  if (!(a.format == b.format)) throw std::invalid_argument(std::string(op) + ": format mismatch");
}

int64_t saturate(__int128 raw, const FixedFormat& fmt) {
  if (raw > fmt.raw_max()) return fmt.raw_max();
  if (raw < fmt.raw_min()) return fmt.raw_min();
  return static_cast<int64_t>(raw);
}

void require_in_range(double scaled, const FixedFormat& fmt, const char* op) {
  if (!std::isfinite(scaled) || scaled < static_cast<double>(fmt.raw_min()) - 1.0 ||
      scaled > static_cast<double>(fmt.raw_max()) + 1.0) {
    throw std::out_of_range(std::string(op) + ": value outside the representable range");
  }
}

} // namespace

FixedValue floor_to_grid(double x, const FixedFormat& fmt) {
  double scaled = std::ldexp(x, fmt.fraction_bits); // exact scaling by 2^n
  require_in_range(scaled, fmt, "floor_to_grid");
  double f = std::floor(scaled);
  if (f < static_cast<double>(fmt.raw_min()) || f > static_cast<double>(fmt.raw_max())) {
    throw std::out_of_range("floor_to_grid: value outside the representable range");
  }
  return FixedValue{fmt, static_cast<int64_t>(f)};
}

FixedValue round_nearest(double x, const FixedFormat& fmt) {
  double scaled = std::ldexp(x, fmt.fraction_bits);
  require_in_range(scaled, fmt, "round_nearest");
  double f = std::floor(scaled);
  double frac = scaled - f; // exact for |scaled| < 2^52
  auto raw = static_cast<int64_t>(f);
  if (frac > 0.5 || (frac == 0.5 && (raw & 1))) raw += 1;
  if (raw < fmt.raw_min() || raw > fmt.raw_max()) {
    throw std::out_of_range("round_nearest: value outside the representable range");
  }
  return FixedValue{fmt, raw};
}

FixedValue round_stochastic(double x, const FixedFormat& fmt, RandomSource& rng) {
  double scaled = std::ldexp(x, fmt.fraction_bits);
  require_in_range(scaled, fmt, "round_stochastic");
  double f = std::floor(scaled);
  double frac = scaled - f;
  double u = rng.uniform(); // always one draw, keeps replay alignment
  auto raw = static_cast<int64_t>(f);
  if (u < frac) raw += 1;
  if (raw < fmt.raw_min() || raw > fmt.raw_max()) {
    throw std::out_of_range("round_stochastic: value outside the representable range");
  }
  return FixedValue{fmt, raw};
}

FixedValue fixed_add(const FixedValue& a, const FixedValue& b) {
  require_same_format(a, b, "fixed_add");
  __int128 sum = static_cast<__int128>(a.raw) + b.raw;
  return FixedValue{a.format, saturate(sum, a.format)};
}

FixedValue fixed_mul(const FixedValue& a, const FixedValue& b, FixedRounding mode, RandomSource& rng) {
  require_same_format(a, b, "fixed_mul");
  const int n = a.format.fraction_bits;
  __int128 prod = static_cast<__int128>(a.raw) * b.raw; // exact, 2n fraction bits
  if (n == 0) return FixedValue{a.format, saturate(prod, a.format)};

  // floor shift keeps rem in [0, 2^n) for either sign
  __int128 q = prod >> n;
  auto rem = static_cast<uint64_t>(prod - (q << n));
  if (mode == FixedRounding::Nearest) {
    uint64_t half = uint64_t{1} << (n - 1);
    if (rem > half || (rem == half && (q & 1))) q += 1;
  } else {
    // P(round up) = rem / 2^n, decided on integer bits so the probability
    // is exact
    uint64_t u = rng.next_u64() >> (64 - n);
    if (u < rem) q += 1;
  }
  return FixedValue{a.format, saturate(q, a.format)};
}

} // namespace mpx

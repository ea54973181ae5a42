#pragma once

#include <cstdint>
#include <stdexcept>

#include "mpx/random.hpp"

namespace mpx {

enum class FixedRounding { Nearest, Stochastic };

/// Q(m, n) layout: m integer bits, n fractional bits, optional sign. The
/// grid step is epsilon = 2^-n; stored values are scaled integers.
struct FixedFormat {
  int integer_bits;   // m
  int fraction_bits;  // n, the number of fractional bits
  bool is_signed;

  FixedFormat(int m, int n, bool sign = true) : integer_bits(m), fraction_bits(n), is_signed(sign) {
    int width = m + n + (sign ? 1 : 0);
    if (m < 1 || n < 0 || width > 64) {
      throw std::invalid_argument("FixedFormat: m + n (+ sign) must fit in 64 bits");
    }
  }

  double epsilon() const { return std::ldexp(1.0, -fraction_bits); }
  int64_t raw_max() const { return (int64_t{1} << (integer_bits + fraction_bits)) - 1; }
  int64_t raw_min() const { return is_signed ? -(int64_t{1} << (integer_bits + fraction_bits)) : 0; }

  bool operator==(const FixedFormat& o) const {
    return integer_bits == o.integer_bits && fraction_bits == o.fraction_bits && is_signed == o.is_signed;
  }
};

/// A point on the fixed grid: value = raw * 2^-n.
struct FixedValue {
  FixedFormat format;
  int64_t raw;

  double value() const { return std::ldexp(static_cast<double>(raw), -format.fraction_bits); }
};

/// Largest grid multiple <= x (floor toward -inf, sign-agnostic).
/// Throws std::out_of_range when x falls outside the representable range.
FixedValue floor_to_grid(double x, const FixedFormat& fmt);

/// Nearest grid point, ties to the even raw integer.
FixedValue round_nearest(double x, const FixedFormat& fmt);

/// floor(x) with probability 1 - (x - floor(x))/eps, else floor(x) + eps.
/// Always consumes exactly one draw, even when x is on the grid.
FixedValue round_stochastic(double x, const FixedFormat& fmt, RandomSource& rng);

/// Exact integer add, saturated to the format range.
FixedValue fixed_add(const FixedValue& a, const FixedValue& b);

/// Exact 2n-fraction-bit product, rounded back to n bits per `mode`
/// (stochastic uses the exact remainder, P(up) = rem/2^n), then saturated.
FixedValue fixed_mul(const FixedValue& a, const FixedValue& b, FixedRounding mode, RandomSource& rng);

} // namespace mpx

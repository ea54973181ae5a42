#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mpx {

enum class RoundMode {
  NearestEven,
  TowardZero,
  TowardPositive,
  TowardNegative,
};

enum class FloatClass {
  Zero,
  Subnormal,
  Normal,
  Infinity,
  NaN,
};

/// Parameters of a binary interchange format: 1 sign bit, `exponent_bits`
/// biased-exponent bits, `fraction_bits` fraction bits. The bias is always
/// 2^(exponent_bits-1) - 1.
struct FloatFormat {
  int total_bits;
  int exponent_bits;
  int fraction_bits;
  int bias;

  FloatFormat(int total, int exp_bits, int frac_bits)
      : total_bits(total), exponent_bits(exp_bits), fraction_bits(frac_bits),
        bias((1 << (exp_bits - 1)) - 1) {
    if (exp_bits < 2 || frac_bits < 1 || total != 1 + exp_bits + frac_bits) {
      throw std::invalid_argument("FloatFormat: total_bits must equal 1 + exponent_bits + fraction_bits");
    }
  }

  int max_biased_exponent() const { return (1 << exponent_bits) - 1; }
  /// Exponent of the smallest normal binade, 1 - bias.
  int min_normal_exponent() const { return 1 - bias; }
  /// Exponent of the largest normal binade (equals bias).
  int max_normal_exponent() const { return bias; }

  bool operator==(const FloatFormat& o) const {
    return total_bits == o.total_bits && exponent_bits == o.exponent_bits &&
           fraction_bits == o.fraction_bits;
  }
  bool operator!=(const FloatFormat& o) const { return !(*this == o); }

  // The five registered interchange formats.
  static const FloatFormat& half();
  static const FloatFormat& single();
  static const FloatFormat& float64();
  static const FloatFormat& quadruple();
  static const FloatFormat& octuple();

  /// Lookup by name: half|single|double|quadruple|octuple, float16/32/64
  /// aliases, or a custom "e<E>f<F>" spec (e.g. "e4f3" for the 8-bit toy
  /// format).
  static FloatFormat by_name(const std::string& name);

  std::string name() const;
};

} // namespace mpx

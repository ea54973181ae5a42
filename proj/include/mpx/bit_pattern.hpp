#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>

#include "mpx/formats.hpp"

namespace mpx {

/// A raw bit string of a fixed width. Wide enough for the 256-bit octuple
/// format, hence the arbitrary-precision value.
struct BitPattern {
  int width;
  mpz_class value;

  BitPattern(int w, mpz_class v);

  static BitPattern from_u64(int width, uint64_t bits);
  /// Low 64 bits; requires width <= 64.
  uint64_t as_u64() const;

  bool bit(int i) const { return mpz_tstbit(value.get_mpz_t(), i) != 0; }

  bool operator==(const BitPattern& o) const {
    return width == o.width && value == o.value;
  }
  bool operator!=(const BitPattern& o) const { return !(*this == o); }
};

/// Extract [lo, lo+len) as an unsigned integer.
mpz_class bit_field(const BitPattern& p, int lo, int len);

/// Grouped text form "S EEEEEEEE FFF..." used throughout the CLI output.
std::string format_pattern(const BitPattern& p, const FloatFormat& fmt);

/// Hex form 0x... zero-padded to the pattern width.
std::string format_pattern_hex(const BitPattern& p);

/// Accepts the grouped binary form (spaces optional) and hex 0x....
/// Throws std::invalid_argument if the text does not parse or its width
/// disagrees with `fmt`.
BitPattern parse_pattern(const std::string& text, const FloatFormat& fmt);

/// True if `text` looks like a bit pattern (0x... or sign/exponent/fraction
/// groups) rather than a decimal number.
bool looks_like_pattern(const std::string& text, const FloatFormat& fmt);

} // namespace mpx

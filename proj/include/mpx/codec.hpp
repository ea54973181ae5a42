#pragma once

#include <utility>
#include <vector>

#include "mpx/bit_pattern.hpp"
#include "mpx/dyadic.hpp"
#include "mpx/formats.hpp"

namespace mpx {

// Bit-level codec for the binary interchange formats. decode is exact (the
// result is a dyadic rational, never a host float); encode performs the one
// and only rounding. Together they are the ground truth the rest of the
// toolkit is tested against.

/// Exact value of a bit pattern. Subnormals (e = 0) decode as
/// s * 2^(1-bias) * f; e = all-ones decodes to +-inf (f = 0) or NaN (f != 0).
ExtendedReal decode(const BitPattern& p, const FloatFormat& fmt);

/// Round an exact value into `fmt`. Overflow goes to +-inf or the largest
/// finite value depending on the mode; NaN encodes as the canonical quiet
/// NaN (top fraction bit set). decode(encode(x)) == x whenever x is
/// representable.
BitPattern encode(const ExtendedReal& x, const FloatFormat& fmt, RoundMode mode = RoundMode::NearestEven);

/// Correctly rounded encode of an exact rational num/den (den > 0). This is
/// how decimal text reaches a format without an intermediate rounding.
BitPattern encode_rational(const mpz_class& num, const mpz_class& den, const FloatFormat& fmt,
                           RoundMode mode = RoundMode::NearestEven);

/// Parse decimal text ("-12.375e-2", "inf", "nan") and encode it with a
/// single rounding.
BitPattern encode_decimal(const std::string& text, const FloatFormat& fmt,
                          RoundMode mode = RoundMode::NearestEven);

FloatClass classify(const BitPattern& p, const FloatFormat& fmt);

/// encode(decode(p, from), to, mode); widening between the registered
/// formats is exact. NaN converts to the canonical quiet NaN of `to`.
BitPattern convert(const BitPattern& p, const FloatFormat& from, const FloatFormat& to,
                   RoundMode mode = RoundMode::NearestEven);

// ulp navigation, IEEE semantics: next_up(-0) = smallest positive subnormal,
// next_up(max finite) = +inf, next_up(+inf) = +inf. NaN input throws.
BitPattern next_up(const BitPattern& p, const FloatFormat& fmt);
BitPattern next_down(const BitPattern& p, const FloatFormat& fmt);

/// Number of representable values in [2^n, 2^(n+1)), constant across the
/// normal range: 2^fraction_bits. n must lie in [1-bias, bias].
mpz_class binade_count(const FloatFormat& fmt, int n);

/// 2^(1-bias) * 2^(-fraction_bits), the smallest positive subnormal.
ExtendedReal smallest_positive(const FloatFormat& fmt);

/// Every pattern of a small format (total_bits <= 16), traversed in
/// sign-magnitude order so finite values come out ascending.
std::vector<std::pair<BitPattern, ExtendedReal>> enumerate(const FloatFormat& fmt);

/// Exact decimal expansion of a finite value rounded (half-even) to `places`
/// digits after the point; "inf"/"-inf"/"nan" otherwise. places < 0 prints
/// the full exact expansion (dyadic rationals always terminate).
std::string decimal_string(const ExtendedReal& x, int places = -1);

} // namespace mpx

#include "mpx/codec.hpp"

#include <cctype>
#include <stdexcept>

namespace mpx {

namespace {

void require_width(const BitPattern& p, const FloatFormat& fmt, const char* op) {
  if (p.width != fmt.total_bits) {
    throw std::invalid_argument(std::string(op) + ": pattern width " + std::to_string(p.width) +
                                " does not match format width " + std::to_string(fmt.total_bits));
  }
}

struct Fields {
  bool negative;
  long biased_exp;
  mpz_class fraction;
};

Fields split(const BitPattern& p, const FloatFormat& fmt) {
  Fields f;
  f.negative = p.bit(fmt.total_bits - 1);
  f.biased_exp = mpz_class(bit_field(p, fmt.fraction_bits, fmt.exponent_bits)).get_si();
  f.fraction = bit_field(p, 0, fmt.fraction_bits);
  return f;
}

BitPattern pack(bool negative, long biased_exp, const mpz_class& fraction, const FloatFormat& fmt) {
  mpz_class v = fraction;
  v |= mpz_class(biased_exp) << fmt.fraction_bits;
  if (negative) v |= mpz_class(1) << (fmt.total_bits - 1);
  return BitPattern(fmt.total_bits, v);
}

BitPattern canonical_qnan(const FloatFormat& fmt) {
  mpz_class frac = mpz_class(1) << (fmt.fraction_bits - 1);
  return pack(false, fmt.max_biased_exponent(), frac, fmt);
}

BitPattern inf_pattern(bool negative, const FloatFormat& fmt) {
  return pack(negative, fmt.max_biased_exponent(), 0, fmt);
}

BitPattern max_finite_pattern(bool negative, const FloatFormat& fmt) {
  mpz_class frac = (mpz_class(1) << fmt.fraction_bits) - 1;
  return pack(negative, fmt.max_biased_exponent() - 1, frac, fmt);
}

// Shared rounding decision for a truncated magnitude. `cmp_half` is the
// comparison of the discarded part against one half of the grid step:
// -1 below, 0 exact tie, +1 above; `any_discarded` covers the cmp_half == -1
// distinction between "exact" and "below half".
bool round_up(RoundMode mode, bool negative, int cmp_half, bool any_discarded, const mpz_class& truncated) {
  switch (mode) {
    case RoundMode::NearestEven:
      if (cmp_half > 0) return true;
      if (cmp_half == 0) return mpz_tstbit(truncated.get_mpz_t(), 0) != 0;
      return false;
    case RoundMode::TowardZero:
      return false;
    case RoundMode::TowardPositive:
      return !negative && any_discarded;
    case RoundMode::TowardNegative:
      return negative && any_discarded;
  }
  return false;
}

// Encode a nonzero magnitude given as an exact rational num/den (both > 0).
BitPattern encode_magnitude(bool negative, const mpz_class& num, const mpz_class& den,
                            const FloatFormat& fmt, RoundMode mode) {
  const int p = fmt.fraction_bits;

  // floor(log2(num/den)): start from the bit-length difference, then adjust.
  long e = static_cast<long>(mpz_sizeinbase(num.get_mpz_t(), 2)) -
           static_cast<long>(mpz_sizeinbase(den.get_mpz_t(), 2));
  // ensure 2^e <= num/den < 2^(e+1)
  {
    mpz_class lhs = e >= 0 ? mpz_class(den << e) : den;
    mpz_class rhs = e >= 0 ? num : mpz_class(num << (-e));
    if (cmp(rhs, lhs) < 0) e -= 1;
  }

  long emin = fmt.min_normal_exponent();
  for (;;) {
    long grid = (e >= emin ? e : emin) - p; // value grid is 2^grid
    // M = round(num/den / 2^grid) under `mode`
    mpz_class n = num, d = den;
    if (grid >= 0) {
      d <<= grid;
    } else {
      n <<= -grid;
    }
    mpz_class q, r;
    mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), n.get_mpz_t(), d.get_mpz_t());
    int cmp_half = cmp(r * 2, d);
    bool any = r != 0;
    if (round_up(mode, negative, cmp_half, any, q)) q += 1;

    if (q == 0) return pack(negative, 0, 0, fmt); // underflow to +-0

    long qbits = static_cast<long>(mpz_sizeinbase(q.get_mpz_t(), 2));
    if (e >= emin && qbits > p + 1) {
      // rounded up across the binade: 2^(p+1) becomes 2^p one binade higher
      e += 1;
      continue; // re-run on the coarser grid (exact: q was a power of two)
    }
    if (e < emin && qbits <= p) {
      return pack(negative, 0, q, fmt); // subnormal
    }
    // normal (covers the subnormal grid rounding up to 2^p = smallest normal)
    long value_exp = grid + qbits - 1;
    long biased = value_exp + fmt.bias;
    if (biased >= fmt.max_biased_exponent()) {
      // overflow handling per mode
      switch (mode) {
        case RoundMode::NearestEven:
          return inf_pattern(negative, fmt);
        case RoundMode::TowardZero:
          return max_finite_pattern(negative, fmt);
        case RoundMode::TowardPositive:
          return negative ? max_finite_pattern(true, fmt) : inf_pattern(false, fmt);
        case RoundMode::TowardNegative:
          return negative ? inf_pattern(true, fmt) : max_finite_pattern(false, fmt);
      }
    }
    mpz_class frac = q - (mpz_class(1) << p);
    return pack(negative, biased, frac, fmt);
  }
}

} // namespace

ExtendedReal decode(const BitPattern& p, const FloatFormat& fmt) {
  require_width(p, fmt, "decode");
  Fields f = split(p, fmt);
  if (f.biased_exp == fmt.max_biased_exponent()) {
    if (f.fraction == 0) return f.negative ? ExtendedReal::neg_inf() : ExtendedReal::pos_inf();
    return ExtendedReal::nan();
  }
  mpz_class mant;
  long exp;
  if (f.biased_exp == 0) {
    // subnormal: s * 2^(1-bias) * f
    mant = f.fraction;
    exp = (1 - fmt.bias) - fmt.fraction_bits;
  } else {
    mant = f.fraction + (mpz_class(1) << fmt.fraction_bits);
    exp = f.biased_exp - fmt.bias - fmt.fraction_bits;
  }
  if (f.negative) mant = -mant;
  return ExtendedReal::finite(Dyadic(std::move(mant), exp));
}

BitPattern encode(const ExtendedReal& x, const FloatFormat& fmt, RoundMode mode) {
  switch (x.kind()) {
    case ExtendedReal::Kind::NaN: return canonical_qnan(fmt);
    case ExtendedReal::Kind::PosInf: return inf_pattern(false, fmt);
    case ExtendedReal::Kind::NegInf: return inf_pattern(true, fmt);
    case ExtendedReal::Kind::Finite: break;
  }
  const Dyadic& d = x.value();
  if (d.is_zero()) return pack(false, 0, 0, fmt);
  bool neg = d.sign() < 0;
  mpz_class mag = ::abs(d.mant());
  long e = d.exp();
  // as a rational: mag * 2^e
  if (e >= 0) return encode_magnitude(neg, mpz_class(mag << e), 1, fmt, mode);
  return encode_magnitude(neg, mag, mpz_class(mpz_class(1) << (-e)), fmt, mode);
}

BitPattern encode_rational(const mpz_class& num, const mpz_class& den, const FloatFormat& fmt, RoundMode mode) {
  if (den <= 0) throw std::invalid_argument("encode_rational: denominator must be positive");
  if (num == 0) return pack(false, 0, 0, fmt);
  bool neg = num < 0;
  return encode_magnitude(neg, ::abs(num), den, fmt, mode);
}

BitPattern encode_decimal(const std::string& text, const FloatFormat& fmt, RoundMode mode) {
  std::string s;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  }
  bool neg = false;
  size_t i = 0;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
    neg = s[i] == '-';
    ++i;
  }
  std::string lower;
  for (size_t j = i; j < s.size(); ++j) lower.push_back(std::tolower(static_cast<unsigned char>(s[j])));
  if (lower == "inf" || lower == "infinity") return inf_pattern(neg, fmt);
  if (lower == "nan") return canonical_qnan(fmt);

  std::string digits;
  long frac_len = 0;
  bool seen_digit = false, seen_dot = false;
  long exp10 = 0;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits.push_back(c);
      if (seen_dot) ++frac_len;
      seen_digit = true;
    } else if (c == '.' && !seen_dot) {
      seen_dot = true;
    } else if ((c == 'e' || c == 'E') && seen_digit) {
      try {
        exp10 = std::stol(s.substr(i + 1));
      } catch (const std::exception&) {
        throw std::invalid_argument("bad decimal number: " + text);
      }
      i = s.size() - 1;
      break;
    } else {
      throw std::invalid_argument("bad decimal number: " + text);
    }
  }
  if (!seen_digit) throw std::invalid_argument("bad decimal number: " + text);

  mpz_class num;
  mpz_set_str(num.get_mpz_t(), digits.empty() ? "0" : digits.c_str(), 10);
  mpz_class den = 1;
  long net = exp10 - frac_len;
  // octuple tops out near 10^78913; beyond +-500000 the result is decided
  // without building the power
  if (num != 0 && net > 500000) {
    ExtendedReal big = neg ? ExtendedReal::finite(Dyadic(-1, 2000000))
                           : ExtendedReal::finite(Dyadic(1, 2000000));
    return encode(big, fmt, mode);
  }
  if (num != 0 && net < -500000) {
    ExtendedReal tiny = neg ? ExtendedReal::finite(Dyadic(-1, -2000000))
                            : ExtendedReal::finite(Dyadic(1, -2000000));
    return encode(tiny, fmt, mode);
  }
  mpz_class pow10;
  mpz_ui_pow_ui(pow10.get_mpz_t(), 10, static_cast<unsigned long>(net >= 0 ? net : -net));
  if (net >= 0) {
    num *= pow10;
  } else {
    den = pow10;
  }
  if (neg) num = -num;
  return encode_rational(num, den, fmt, mode);
}

FloatClass classify(const BitPattern& p, const FloatFormat& fmt) {
  require_width(p, fmt, "classify");
  Fields f = split(p, fmt);
  if (f.biased_exp == fmt.max_biased_exponent()) {
    return f.fraction == 0 ? FloatClass::Infinity : FloatClass::NaN;
  }
  if (f.biased_exp == 0) return f.fraction == 0 ? FloatClass::Zero : FloatClass::Subnormal;
  return FloatClass::Normal;
}

BitPattern convert(const BitPattern& p, const FloatFormat& from, const FloatFormat& to, RoundMode mode) {
  require_width(p, from, "convert");
  return encode(decode(p, from), to, mode);
}

BitPattern next_up(const BitPattern& p, const FloatFormat& fmt) {
  require_width(p, fmt, "next_up");
  if (classify(p, fmt) == FloatClass::NaN) throw std::domain_error("next_up: NaN input");
  bool neg = p.bit(fmt.total_bits - 1);
  mpz_class mag = p.value & ((mpz_class(1) << (fmt.total_bits - 1)) - 1);
  mpz_class inf_mag = mpz_class(fmt.max_biased_exponent()) << fmt.fraction_bits;
  if (!neg) {
    if (mag == inf_mag) return p; // next_up(+inf) = +inf
    return BitPattern(fmt.total_bits, mag + 1);
  }
  if (mag == 0) return BitPattern(fmt.total_bits, 1); // -0 -> smallest positive subnormal
  mpz_class v = (mpz_class(1) << (fmt.total_bits - 1)) | (mag - 1);
  return BitPattern(fmt.total_bits, v);
}

BitPattern next_down(const BitPattern& p, const FloatFormat& fmt) {
  require_width(p, fmt, "next_down");
  if (classify(p, fmt) == FloatClass::NaN) throw std::domain_error("next_down: NaN input");
  bool neg = p.bit(fmt.total_bits - 1);
  mpz_class mag = p.value & ((mpz_class(1) << (fmt.total_bits - 1)) - 1);
  mpz_class inf_mag = mpz_class(fmt.max_biased_exponent()) << fmt.fraction_bits;
  if (neg) {
    if (mag == inf_mag) return p; // next_down(-inf) = -inf
    mpz_class v = (mpz_class(1) << (fmt.total_bits - 1)) | (mag + 1);
    return BitPattern(fmt.total_bits, v);
  }
  if (mag == 0) {
    mpz_class v = (mpz_class(1) << (fmt.total_bits - 1)) | 1; // +0 -> smallest negative
    return BitPattern(fmt.total_bits, v);
  }
  return BitPattern(fmt.total_bits, mag - 1);
}

mpz_class binade_count(const FloatFormat& fmt, int n) {
  if (n < fmt.min_normal_exponent() || n > fmt.max_normal_exponent()) {
    throw std::out_of_range("binade_count: n outside the normal exponent range");
  }
  return mpz_class(1) << fmt.fraction_bits;
}

ExtendedReal smallest_positive(const FloatFormat& fmt) {
  return ExtendedReal::finite(Dyadic(1, (1 - fmt.bias) - fmt.fraction_bits));
}

std::vector<std::pair<BitPattern, ExtendedReal>> enumerate(const FloatFormat& fmt) {
  if (fmt.total_bits > 16) {
    throw std::invalid_argument("enumerate: format wider than 16 bits");
  }
  std::vector<std::pair<BitPattern, ExtendedReal>> out;
  out.reserve(size_t{1} << fmt.total_bits);
  const uint64_t half_count = uint64_t{1} << (fmt.total_bits - 1);
  const uint64_t sign_bit = half_count;
  // negative wing, magnitude descending, then positive wing ascending
  for (uint64_t mag = half_count; mag-- > 1;) {
    BitPattern p = BitPattern::from_u64(fmt.total_bits, sign_bit | mag);
    out.emplace_back(p, decode(p, fmt));
  }
  {
    BitPattern p = BitPattern::from_u64(fmt.total_bits, sign_bit); // -0
    out.emplace_back(p, decode(p, fmt));
  }
  for (uint64_t mag = 0; mag < half_count; ++mag) {
    BitPattern p = BitPattern::from_u64(fmt.total_bits, mag);
    out.emplace_back(p, decode(p, fmt));
  }
  return out;
}

std::string decimal_string(const ExtendedReal& x, int places) {
  switch (x.kind()) {
    case ExtendedReal::Kind::PosInf: return "inf";
    case ExtendedReal::Kind::NegInf: return "-inf";
    case ExtendedReal::Kind::NaN: return "nan";
    case ExtendedReal::Kind::Finite: break;
  }
  const Dyadic& d = x.value();
  bool neg = d.sign() < 0;
  mpz_class mag = ::abs(d.mant());
  long e = d.exp();

  mpz_class int_part, frac_num;
  long frac_shift = 0; // fractional part = frac_num / 2^frac_shift
  if (e >= 0) {
    int_part = mag << e;
    frac_num = 0;
  } else {
    frac_shift = -e;
    int_part = mag >> frac_shift;
    frac_num = mag - (int_part << frac_shift);
  }

  std::string frac_digits;
  if (places < 0) {
    // exact expansion: frac_num / 2^s = frac_num * 5^s / 10^s
    if (frac_num != 0) {
      mpz_class pow5;
      mpz_ui_pow_ui(pow5.get_mpz_t(), 5, static_cast<unsigned long>(frac_shift));
      mpz_class scaled = frac_num * pow5;
      frac_digits = scaled.get_str();
      if (static_cast<long>(frac_digits.size()) < frac_shift) {
        frac_digits.insert(0, frac_shift - frac_digits.size(), '0');
      }
      while (!frac_digits.empty() && frac_digits.back() == '0') frac_digits.pop_back();
    }
  } else if (places > 0) {
    // round(frac * 10^places), half to even
    mpz_class pow10;
    mpz_ui_pow_ui(pow10.get_mpz_t(), 10, static_cast<unsigned long>(places));
    mpz_class n = frac_num * pow10;
    mpz_class q = n >> frac_shift;
    mpz_class r = n - (q << frac_shift);
    int c;
    {
      mpz_class half = frac_shift > 0 ? mpz_class(mpz_class(1) << (frac_shift - 1)) : mpz_class(0);
      c = cmp(r, half);
    }
    if (c > 0 || (c == 0 && r != 0 && mpz_tstbit(q.get_mpz_t(), 0))) q += 1;
    if (q >= pow10) {
      q -= pow10;
      int_part += 1;
    }
    frac_digits = q.get_str();
    if (static_cast<long>(frac_digits.size()) < places) {
      frac_digits.insert(0, places - frac_digits.size(), '0');
    }
  }

  std::string out = neg ? "-" : "";
  out += int_part.get_str();
  if (places < 0) {
    if (!frac_digits.empty()) out += "." + frac_digits;
  } else if (places > 0) {
    out += "." + frac_digits;
  }
  return out;
}

} // namespace mpx

#include "mpx/soft_ops.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <stdexcept>

namespace mpx {

namespace {

using u64 = uint64_t;
using u128 = unsigned __int128;

constexpr u64 kExpMask = 0x7ffull;
constexpr u64 kFracMask = (u64{1} << 52) - 1;

struct Unpacked {
  bool neg;
  long exp;  // value = +-mant * 2^exp
  u64 mant;  // 0 for zero, <= 2^53 - 1 otherwise
};

inline Unpacked unpack(double x) {
  u64 bits = std::bit_cast<u64>(x);
  Unpacked u;
  u.neg = bits >> 63;
  u64 e = (bits >> 52) & kExpMask;
  u64 f = bits & kFracMask;
  if (e == 0) {
    u.mant = f;
    u.exp = -1074;
  } else {
    u.mant = f | (u64{1} << 52);
    u.exp = static_cast<long>(e) - 1023 - 52;
  }
  return u;
}

inline int msb_index(u128 v) {
  u64 hi = static_cast<u64>(v >> 64);
  if (hi != 0) return 127 - std::countl_zero(hi);
  return 63 - std::countl_zero(static_cast<u64>(v));
}

inline void check_format(const FloatFormat& fmt) {
  if (fmt.fraction_bits > 52 || fmt.bias > 1023) {
    throw std::invalid_argument("soft_ops: format wider than binary64 is not supported here");
  }
}

// Round the exact value (mant + sticky_fraction) * 2^exp, 0 < sticky
// fraction < 1, into fmt with nearest-even. mant == 0 with sticky set has no
// well-defined rounding and cannot arise from the callers (the discarded
// fraction always sits far below the leading bit).
double pack(bool neg, u128 mant, long exp, bool sticky, const FloatFormat& fmt) {
  if (mant == 0) {
    if (sticky) throw std::logic_error("soft_ops: lost all significant bits");
    return neg ? -0.0 : 0.0;
  }
  const int p = fmt.fraction_bits;
  const long emin = fmt.min_normal_exponent();
  long value_exp = exp + msb_index(mant);
  long grid = (value_exp >= emin ? value_exp : emin) - p;
  long shift = grid - exp;

  u64 m;
  int cmp_half;  // discarded part vs half a grid step
  bool m_exact = false;
  if (shift <= 0) {
    // grid at least as fine as the window: value is exact on the grid
    if (sticky) throw std::logic_error("soft_ops: sticky below an exact grid");
    m = static_cast<u64>(mant << (-shift));
    cmp_half = -1;
    m_exact = true;
  } else if (shift >= 128) {
    m = 0;
    long half_exp = grid - 1; // half step = 2^(grid-1)
    bool pow2 = (mant & (mant - 1)) == 0;
    if (value_exp > half_exp) cmp_half = 1;
    else if (value_exp < half_exp) cmp_half = -1;
    else cmp_half = (pow2 && !sticky) ? 0 : 1;
  } else {
    m = static_cast<u64>(mant >> shift);
    u128 rem = mant & ((u128{1} << shift) - 1);
    u128 half = u128{1} << (shift - 1);
    if (rem > half) cmp_half = 1;
    else if (rem == half) cmp_half = sticky ? 1 : 0;
    else if (rem == 0 && !sticky) { cmp_half = -1; m_exact = true; }
    else cmp_half = -1;
  }

  if (!m_exact) {
    if (cmp_half > 0 || (cmp_half == 0 && (m & 1))) {
      m += 1;
      if (m == (u64{1} << (p + 1)) && value_exp >= emin) {
        m >>= 1;
        grid += 1;
      }
    }
  }
  if (m == 0) return neg ? -0.0 : 0.0;

  long final_exp = grid + (63 - std::countl_zero(m));
  if (final_exp > fmt.max_normal_exponent()) {
    return neg ? -HUGE_VAL : HUGE_VAL; // overflow, nearest-even
  }
  double r = std::ldexp(static_cast<double>(m), static_cast<int>(grid)); // exact
  return neg ? -r : r;
}

} // namespace

double round_to_format(double x, const FloatFormat& fmt) {
  check_format(fmt);
  if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(x) || x == 0.0) return x;
  Unpacked u = unpack(x);
  return pack(u.neg, u.mant, u.exp, false, fmt);
}

double fma_round(double x, double y, double z, const FloatFormat& fmt) {
  check_format(fmt);
  if (std::isnan(x) || std::isnan(y) || std::isnan(z)) {
    return std::numeric_limits<double>::quiet_NaN();
  }

  const bool px_inf = std::isinf(x), py_inf = std::isinf(y), pz_inf = std::isinf(z);
  const bool prod_neg = std::signbit(x) != std::signbit(y);
  if (px_inf || py_inf) {
    if (x == 0.0 || y == 0.0) return std::numeric_limits<double>::quiet_NaN(); // 0 * inf
    if (pz_inf && std::signbit(z) != prod_neg) return std::numeric_limits<double>::quiet_NaN();
    return prod_neg ? -HUGE_VAL : HUGE_VAL;
  }
  if (pz_inf) return z;

  Unpacked ux = unpack(x), uy = unpack(y), uz = unpack(z);
  u128 mp = static_cast<u128>(ux.mant) * uy.mant;
  long ep = ux.exp + uy.exp;

  if (mp == 0) {
    if (uz.mant != 0) return z;
    return (prod_neg && uz.neg) ? -0.0 : 0.0;
  }
  if (uz.mant == 0) return pack(prod_neg, mp, ep, false, fmt);

  // order the two addends by exact magnitude
  long vp = ep + msb_index(mp);
  long vz = uz.exp + msb_index(uz.mant);
  u128 mz = uz.mant;
  bool big_is_prod;
  if (vp != vz) {
    big_is_prod = vp > vz;
  } else {
    // align both leading bits and compare exactly
    u128 a = mp << (126 - msb_index(mp));
    u128 b = mz << (126 - msb_index(mz));
    big_is_prod = a >= b;
  }
  u128 mbig = big_is_prod ? mp : mz;
  long ebig = big_is_prod ? ep : uz.exp;
  bool sbig = big_is_prod ? prod_neg : uz.neg;
  u128 msmall = big_is_prod ? mz : mp;
  long esmall = big_is_prod ? uz.exp : ep;
  bool ssmall = big_is_prod ? uz.neg : prod_neg;

  // big's leading bit at position 126; align small into the same window
  int lead = msb_index(mbig);
  u128 big_al = mbig << (126 - lead);
  long estar = ebig + lead - 126;
  long t = esmall - estar;
  u128 small_al;
  bool sticky = false;
  if (t >= 0) {
    small_al = msmall << t;
  } else {
    long s = -t;
    if (s >= 128) {
      small_al = 0;
      sticky = msmall != 0;
    } else {
      sticky = (msmall & ((u128{1} << s) - 1)) != 0;
      small_al = msmall >> s;
    }
  }

  u128 msum;
  if (sbig == ssmall) {
    msum = big_al + small_al;
  } else {
    msum = big_al - small_al;
    if (sticky) msum -= 1; // borrow from the lost fraction; sticky stays set
    if (msum == 0 && !sticky) return 0.0; // exact cancellation
  }
  return pack(sbig, msum, estar, sticky, fmt);
}

double add_round(double x, double y, const FloatFormat& fmt) {
  return fma_round(x, 1.0, y, fmt);
}

double mul_round(double x, double y, const FloatFormat& fmt) {
  check_format(fmt);
  if (std::isnan(x) || std::isnan(y)) return std::numeric_limits<double>::quiet_NaN();
  bool neg = std::signbit(x) != std::signbit(y);
  if (std::isinf(x) || std::isinf(y)) {
    if (x == 0.0 || y == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return neg ? -HUGE_VAL : HUGE_VAL;
  }
  Unpacked ux = unpack(x), uy = unpack(y);
  u128 mp = static_cast<u128>(ux.mant) * uy.mant;
  if (mp == 0) return neg ? -0.0 : 0.0;
  return pack(neg, mp, ux.exp + uy.exp, false, fmt);
}

bool representable_in(double x, const FloatFormat& fmt) {
  if (std::isnan(x)) return true;
  double r = round_to_format(x, fmt);
  return std::bit_cast<uint64_t>(r) == std::bit_cast<uint64_t>(x);
}

} // namespace mpx

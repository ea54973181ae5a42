#include "mpx/dyadic.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <stdexcept>

namespace mpx {

namespace {

void canonicalize(mpz_class& mant, long& exp) {
  if (mant == 0) {
    exp = 0;
    return;
  }
  // strip trailing zero bits into the exponent
  mp_bitcnt_t tz = mpz_scan1(mant.get_mpz_t(), 0);
  if (tz > 0) {
    mant >>= tz;
    exp += static_cast<long>(tz);
  }
}

} // namespace

Dyadic::Dyadic(mpz_class mant, long exp) : mant_(std::move(mant)), exp_(exp) {
  canonicalize(mant_, exp_);
}

Dyadic Dyadic::from_double(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("Dyadic::from_double: non-finite input");
  if (x == 0.0) return Dyadic();
  int e = 0;
  double frac = std::frexp(x, &e);           // x = frac * 2^e, |frac| in [0.5, 1)
  double scaled = std::ldexp(frac, 53);      // integral, |scaled| < 2^53
  auto m = static_cast<int64_t>(scaled);
  uint64_t mag = m < 0 ? static_cast<uint64_t>(-m) : static_cast<uint64_t>(m);
  mpz_class mant;
  mpz_import(mant.get_mpz_t(), 1, 1, sizeof(mag), 0, 0, &mag);
  if (m < 0) mant = -mant;
  return Dyadic(mant, e - 53);
}

long Dyadic::floor_log2() const {
  if (is_zero()) throw std::domain_error("floor_log2 of zero");
  return static_cast<long>(mpz_sizeinbase(mant_.get_mpz_t(), 2)) - 1 + exp_;
}

Dyadic Dyadic::operator-() const {
  Dyadic r;
  r.mant_ = -mant_;
  r.exp_ = exp_;
  return r;
}

Dyadic Dyadic::abs() const { return sign() < 0 ? -*this : *this; }

Dyadic Dyadic::times_pow2(long k) const {
  if (is_zero()) return *this;
  Dyadic r;
  r.mant_ = mant_;
  r.exp_ = exp_ + k;
  return r;
}

Dyadic operator+(const Dyadic& a, const Dyadic& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  long e = std::min(a.exp_, b.exp_);
  mpz_class ma = a.mant_ << (a.exp_ - e);
  mpz_class mb = b.mant_ << (b.exp_ - e);
  return Dyadic(ma + mb, e);
}

Dyadic operator-(const Dyadic& a, const Dyadic& b) { return a + (-b); }

Dyadic operator*(const Dyadic& a, const Dyadic& b) {
  if (a.is_zero() || b.is_zero()) return Dyadic();
  return Dyadic(a.mant_ * b.mant_, a.exp_ + b.exp_);
}

int Dyadic::compare(const Dyadic& a, const Dyadic& b) {
  int sa = a.sign(), sb = b.sign();
  if (sa != sb) return sa < sb ? -1 : 1;
  if (sa == 0) return 0;
  // same nonzero sign: compare magnitudes via aligned mantissas
  long e = std::min(a.exp_, b.exp_);
  mpz_class ma = a.mant_ << (a.exp_ - e);
  mpz_class mb = b.mant_ << (b.exp_ - e);
  return cmp(ma, mb) < 0 ? -1 : (cmp(ma, mb) > 0 ? 1 : 0);
}

double Dyadic::to_double() const {
  if (is_zero()) return 0.0;
  // Round nearest-even into the 53-bit double significand.
  size_t bits = mpz_sizeinbase(mant_.get_mpz_t(), 2);
  mpz_class mag = ::abs(mant_);
  long shift = static_cast<long>(bits) - 53;
  long e = exp_;
  if (shift > 0) {
    mpz_class rem = mag & ((mpz_class(1) << shift) - 1);
    mag >>= shift;
    e += shift;
    mpz_class half = mpz_class(1) << (shift - 1);
    int c = cmp(rem, half);
    if (c > 0 || (c == 0 && mpz_tstbit(mag.get_mpz_t(), 0))) {
      mag += 1;
      if (mpz_sizeinbase(mag.get_mpz_t(), 2) > 53) {
        mag >>= 1;
        e += 1;
      }
    }
  }
  double m = mag.get_d(); // exact: mag < 2^53
  double r = std::ldexp(m, static_cast<int>(e));
  return sign() < 0 ? -r : r;
}

std::string Dyadic::to_string() const {
  return mant_.get_str() + "*2^" + std::to_string(exp_);
}

ExtendedReal ExtendedReal::from_double(double x) {
  if (std::isnan(x)) return nan();
  if (std::isinf(x)) return x > 0 ? pos_inf() : neg_inf();
  return finite(Dyadic::from_double(x));
}

const Dyadic& ExtendedReal::value() const {
  if (!is_finite()) throw std::domain_error("ExtendedReal::value: not finite");
  return value_;
}

bool ExtendedReal::same_value(const ExtendedReal& o) const {
  if (kind_ != o.kind_) return false;
  if (kind_ == Kind::NaN) return false;
  if (kind_ != Kind::Finite) return true;
  return value_ == o.value_;
}

double ExtendedReal::to_double() const {
  switch (kind_) {
    case Kind::PosInf: return HUGE_VAL;
    case Kind::NegInf: return -HUGE_VAL;
    case Kind::NaN: return std::nan("");
    case Kind::Finite: break;
  }
  return value_.to_double();
}

std::string ExtendedReal::to_string() const {
  switch (kind_) {
    case Kind::PosInf: return "inf";
    case Kind::NegInf: return "-inf";
    case Kind::NaN: return "nan";
    case Kind::Finite: break;
  }
  return value_.to_string();
}

} // namespace mpx

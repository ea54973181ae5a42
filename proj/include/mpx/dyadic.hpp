#pragma once

#include <gmpxx.h>

#include <string>

namespace mpx {

/// Exact dyadic rational: mant * 2^exp with an arbitrary-precision integer
/// mantissa. Kept canonical (mant odd, or mant == 0 and exp == 0) so equal
/// values compare equal structurally. All arithmetic here is exact; nothing
/// in this type ever touches host floating point except the explicit
/// conversions.
class Dyadic {
 public:
  Dyadic() : mant_(0), exp_(0) {}
  Dyadic(mpz_class mant, long exp);

  static Dyadic from_int(long v) { return Dyadic(mpz_class(v), 0); }
  /// Exact conversion; x must be finite.
  static Dyadic from_double(double x);

  const mpz_class& mant() const { return mant_; }
  long exp() const { return exp_; }

  bool is_zero() const { return mant_ == 0; }
  int sign() const { return sgn(mant_); }
  /// floor(log2 |v|); requires nonzero.
  long floor_log2() const;

  Dyadic operator-() const;
  Dyadic abs() const;
  Dyadic times_pow2(long k) const;

  friend Dyadic operator+(const Dyadic& a, const Dyadic& b);
  friend Dyadic operator-(const Dyadic& a, const Dyadic& b);
  friend Dyadic operator*(const Dyadic& a, const Dyadic& b);

  /// Three-way compare: -1, 0, +1.
  static int compare(const Dyadic& a, const Dyadic& b);
  bool operator==(const Dyadic& o) const { return compare(*this, o) == 0; }
  bool operator!=(const Dyadic& o) const { return compare(*this, o) != 0; }
  bool operator<(const Dyadic& o) const { return compare(*this, o) < 0; }
  bool operator<=(const Dyadic& o) const { return compare(*this, o) <= 0; }
  bool operator>(const Dyadic& o) const { return compare(*this, o) > 0; }
  bool operator>=(const Dyadic& o) const { return compare(*this, o) >= 0; }

  /// Nearest-even double; overflows to +-inf. Used only for reporting.
  double to_double() const;

  /// "mant*2^exp" debug form.
  std::string to_string() const;

 private:
  mpz_class mant_;
  long exp_;
};

/// The extended reals the codec maps bit patterns onto: exact finite dyadics
/// plus the two infinities, with NaN for the e = all-ones, f != 0 patterns.
class ExtendedReal {
 public:
  enum class Kind { Finite, PosInf, NegInf, NaN };

  ExtendedReal() : kind_(Kind::Finite), value_() {}

  static ExtendedReal finite(Dyadic d) { return ExtendedReal(Kind::Finite, std::move(d)); }
  static ExtendedReal zero() { return finite(Dyadic()); }
  static ExtendedReal pos_inf() { return ExtendedReal(Kind::PosInf, Dyadic()); }
  static ExtendedReal neg_inf() { return ExtendedReal(Kind::NegInf, Dyadic()); }
  static ExtendedReal nan() { return ExtendedReal(Kind::NaN, Dyadic()); }
  static ExtendedReal from_double(double x);

  Kind kind() const { return kind_; }
  bool is_finite() const { return kind_ == Kind::Finite; }
  bool is_nan() const { return kind_ == Kind::NaN; }
  bool is_inf() const { return kind_ == Kind::PosInf || kind_ == Kind::NegInf; }
  bool is_zero() const { return is_finite() && value_.is_zero(); }

  /// Finite payload; requires is_finite().
  const Dyadic& value() const;

  /// Equality with NaN != NaN, like the values they stand for.
  bool same_value(const ExtendedReal& o) const;

  double to_double() const;
  std::string to_string() const;

 private:
  ExtendedReal(Kind k, Dyadic v) : kind_(k), value_(std::move(v)) {}
  Kind kind_;
  Dyadic value_;
};

} // namespace mpx

#pragma once

#include "mpx/formats.hpp"

namespace mpx {

// Scalar kernels over double carriers. A "carrier" is a host double whose
// value is exactly representable in some narrower format; every finite
// half/single value is exactly a double, so doubles can ferry values of any
// format up to binary64 without loss. These kernels compute exact results
// in integer arithmetic and round once (nearest-even) into the target
// format, with full gradual underflow. They must agree bit for bit with the
// mpz codec; the tests enforce that.
//
// Formats are restricted to fraction_bits <= 52 and a range no wider than
// binary64 (half/single/double and small toy formats).

/// Single rounding of the exact value of x into fmt.
double round_to_format(double x, const FloatFormat& fmt);

/// Exact x*y + z rounded once into fmt. The intermediate product is never
/// rounded. For fmt = double this is the correctly rounded fused
/// multiply-add.
double fma_round(double x, double y, double z, const FloatFormat& fmt);

/// Correctly rounded sum / product in fmt.
double add_round(double x, double y, const FloatFormat& fmt);
double mul_round(double x, double y, const FloatFormat& fmt);

/// True when x (including -0, inf, NaN) survives round_to_format unchanged.
bool representable_in(double x, const FloatFormat& fmt);

} // namespace mpx

#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "mpx/dyadic.hpp"
#include "mpx/formats.hpp"
#include "mpx/random.hpp"
#include "mpx/soft_ops.hpp"

namespace mpx {

/// Dense row-major matrix whose elements all live in one storage format.
/// Elements are kept as double carriers; the factories round incoming
/// values (nearest-even) so the representability invariant holds by
/// construction. Formats wider than binary64 are codec-only and rejected
/// here.
struct Matrix {
  int rows = 0;
  int cols = 0;
  FloatFormat format;
  std::vector<double> data;

  Matrix(int r, int c, const FloatFormat& fmt);

  static Matrix quantize(int r, int c, const FloatFormat& fmt, std::span<const double> values);
  static Matrix identity(int n, const FloatFormat& fmt);
  static Matrix random_uniform(int r, int c, const FloatFormat& fmt, double lo, double hi,
                               RandomSource& rng);

  double& at(int i, int j) { return data[static_cast<size_t>(i) * cols + j]; }
  double at(int i, int j) const { return data[static_cast<size_t>(i) * cols + j]; }
};

/// Precision split for a mixed product: inputs arrive in input_format,
/// every fused multiply-add accumulates in accumulate_format, and the
/// result is rounded once into final_format. The accumulator must be at
/// least as wide as the input.
struct AccumulationPolicy {
  FloatFormat input_format;
  FloatFormat accumulate_format;
  FloatFormat final_format;

  AccumulationPolicy(const FloatFormat& in, const FloatFormat& acc, const FloatFormat& fin);
};

/// c_ij = sum_k a_ik * b_kj with every partial accumulated by one fma in
/// the accumulation format, k ascending, one final rounding. Inputs must be
/// tagged with policy.input_format.
Matrix gemm_mixed(const Matrix& a, const Matrix& b, const AccumulationPolicy& policy);

/// Same loop, but the product and the running sum are each rounded into
/// `fmt` at every step: the baseline that shows what un-widened
/// accumulation costs.
Matrix gemm_uniform(const Matrix& a, const Matrix& b, const FloatFormat& fmt);

/// Exact product, no rounding anywhere.
struct ExactMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<Dyadic> data;

  Dyadic& at(int i, int j) { return data[static_cast<size_t>(i) * cols + j]; }
  const Dyadic& at(int i, int j) const { return data[static_cast<size_t>(i) * cols + j]; }
};

ExactMatrix gemm_oracle(const Matrix& a, const Matrix& b);

struct ErrorNorms {
  double max_abs;
  double frobenius_rel;
};

/// Elementwise max |X - ref| and ||X - ref||_F / ||ref||_F (absolute when
/// ref is all zero). Differences are formed exactly before any rounding.
ErrorNorms error_norms(const Matrix& x, const ExactMatrix& ref);

// Matrix file format: a `# format=<name> rows=<m> cols=<p>` header line,
// then rows of comma-separated decimals. Values are parsed exactly and
// encoded (nearest-even) into the declared format.
void write_matrix_csv(std::ostream& os, const Matrix& m);
Matrix read_matrix_csv(std::istream& is);

} // namespace mpx

#include "mpx/linalg.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "mpx/codec.hpp"

namespace mpx {

namespace {

void check_linalg_format(const FloatFormat& fmt) {
  if (fmt.fraction_bits > 52 || fmt.bias > 1023) {
    throw std::invalid_argument("linalg: formats wider than binary64 are codec-only");
  }
}

void check_product_dims(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) {
    throw std::invalid_argument("gemm: dimension mismatch (" + std::to_string(a.cols) +
                                " vs " + std::to_string(b.rows) + ")");
  }
}

} // namespace

Matrix::Matrix(int r, int c, const FloatFormat& fmt) : rows(r), cols(c), format(fmt) {
  check_linalg_format(fmt);
  if (r <= 0 || c <= 0) throw std::invalid_argument("Matrix: dimensions must be positive");
  data.assign(static_cast<size_t>(r) * c, 0.0);
}

Matrix Matrix::quantize(int r, int c, const FloatFormat& fmt, std::span<const double> values) {
  Matrix m(r, c, fmt);
  if (values.size() != m.data.size()) throw std::invalid_argument("Matrix::quantize: size mismatch");
  for (size_t i = 0; i < values.size(); ++i) m.data[i] = round_to_format(values[i], fmt);
  return m;
}

Matrix Matrix::identity(int n, const FloatFormat& fmt) {
  Matrix m(n, n, fmt);
  for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

Matrix Matrix::random_uniform(int r, int c, const FloatFormat& fmt, double lo, double hi,
                              RandomSource& rng) {
  Matrix m(r, c, fmt);
  for (auto& v : m.data) v = round_to_format(rng.uniform(lo, hi), fmt);
  return m;
}

AccumulationPolicy::AccumulationPolicy(const FloatFormat& in, const FloatFormat& acc,
                                       const FloatFormat& fin)
    : input_format(in), accumulate_format(acc), final_format(fin) {
  check_linalg_format(in);
  check_linalg_format(acc);
  check_linalg_format(fin);
  if (acc.fraction_bits < in.fraction_bits || acc.exponent_bits < in.exponent_bits) {
    throw std::invalid_argument("AccumulationPolicy: accumulate format narrower than input");
  }
}

Matrix gemm_mixed(const Matrix& a, const Matrix& b, const AccumulationPolicy& policy) {
  check_product_dims(a, b);
  if (a.format != policy.input_format || b.format != policy.input_format) {
    throw std::invalid_argument("gemm_mixed: inputs must be in the policy input format");
  }
  Matrix c(a.rows, b.cols, policy.final_format);
  const FloatFormat& acc_fmt = policy.accumulate_format;
  for (int i = 0; i < a.rows; ++i) {
    for (int j = 0; j < b.cols; ++j) {
      double acc = 0.0;
      for (int k = 0; k < a.cols; ++k) {
        acc = fma_round(a.at(i, k), b.at(k, j), acc, acc_fmt);
      }
      c.at(i, j) = round_to_format(acc, policy.final_format);
    }
  }
  return c;
}

Matrix gemm_uniform(const Matrix& a, const Matrix& b, const FloatFormat& fmt) {
  check_product_dims(a, b);
  check_linalg_format(fmt);
  if (a.format != fmt || b.format != fmt) {
    throw std::invalid_argument("gemm_uniform: inputs must be in fmt");
  }
  Matrix c(a.rows, b.cols, fmt);
  for (int i = 0; i < a.rows; ++i) {
    for (int j = 0; j < b.cols; ++j) {
      double acc = 0.0;
      for (int k = 0; k < a.cols; ++k) {
        double p = mul_round(a.at(i, k), b.at(k, j), fmt);
        acc = add_round(acc, p, fmt);
      }
      c.at(i, j) = acc;
    }
  }
  return c;
}

ExactMatrix gemm_oracle(const Matrix& a, const Matrix& b) {
  check_product_dims(a, b);
  for (double v : a.data) {
    if (!std::isfinite(v)) throw std::invalid_argument("gemm_oracle: non-finite input");
  }
  for (double v : b.data) {
    if (!std::isfinite(v)) throw std::invalid_argument("gemm_oracle: non-finite input");
  }
  ExactMatrix c;
  c.rows = a.rows;
  c.cols = b.cols;
  c.data.assign(static_cast<size_t>(c.rows) * c.cols, Dyadic());
  for (int i = 0; i < a.rows; ++i) {
    for (int j = 0; j < b.cols; ++j) {
      Dyadic acc;
      for (int k = 0; k < a.cols; ++k) {
        acc = acc + Dyadic::from_double(a.at(i, k)) * Dyadic::from_double(b.at(k, j));
      }
      c.at(i, j) = acc;
    }
  }
  return c;
}

ErrorNorms error_norms(const Matrix& x, const ExactMatrix& ref) {
  if (x.rows != ref.rows || x.cols != ref.cols) {
    throw std::invalid_argument("error_norms: shape mismatch");
  }
  for (double v : x.data) {
    if (!std::isfinite(v)) return ErrorNorms{HUGE_VAL, HUGE_VAL};
  }
  Dyadic max_abs;
  Dyadic err_sq, ref_sq;
  for (size_t i = 0; i < x.data.size(); ++i) {
    Dyadic err = Dyadic::from_double(x.data[i]) - ref.data[i];
    Dyadic abs_err = err.abs();
    if (abs_err > max_abs) max_abs = abs_err;
    err_sq = err_sq + err * err;
    ref_sq = ref_sq + ref.data[i] * ref.data[i];
  }
  double frob_err = std::sqrt(err_sq.to_double());
  double frob_ref = std::sqrt(ref_sq.to_double());
  double rel = ref_sq.is_zero() ? frob_err : frob_err / frob_ref;
  return ErrorNorms{max_abs.to_double(), rel};
}

void write_matrix_csv(std::ostream& os, const Matrix& m) {
  os << "# format=" << m.format.name() << " rows=" << m.rows << " cols=" << m.cols << "\n";
  char buf[64];
  for (int i = 0; i < m.rows; ++i) {
    for (int j = 0; j < m.cols; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m.at(i, j));
      os << buf << (j + 1 < m.cols ? "," : "\n");
    }
  }
}

Matrix read_matrix_csv(std::istream& is) {
  std::string header;
  if (!std::getline(is, header) || header.rfind("# ", 0) != 0) {
    throw std::runtime_error("matrix csv: missing '# format=... rows=... cols=...' header");
  }
  std::string fmt_name;
  int rows = -1, cols = -1;
  std::istringstream hs(header.substr(2));
  std::string tok;
  while (hs >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) continue;
    std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
    if (key == "format") fmt_name = val;
    else if (key == "rows") rows = std::stoi(val);
    else if (key == "cols") cols = std::stoi(val);
  }
  if (fmt_name.empty() || rows <= 0 || cols <= 0) {
    throw std::runtime_error("matrix csv: bad header: " + header);
  }
  FloatFormat fmt = FloatFormat::by_name(fmt_name);
  check_linalg_format(fmt);
  Matrix m(rows, cols, fmt);
  std::string line;
  int i = 0;
  while (i < rows && std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string cell;
    for (int j = 0; j < cols; ++j) {
      if (!std::getline(ls, cell, ',')) {
        throw std::runtime_error("matrix csv: row " + std::to_string(i) + " too short");
      }
      m.at(i, j) = decode(encode_decimal(cell, fmt), fmt).to_double();
    }
    ++i;
  }
  if (i != rows) throw std::runtime_error("matrix csv: expected " + std::to_string(rows) + " rows");
  return m;
}

} // namespace mpx

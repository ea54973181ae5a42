#include "mpx/pcm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>

#include "mpx/config.hpp"

namespace mpx {

namespace {

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// digital float64 gemv: y = A x
void gemv(const std::vector<double>& a, int n, std::span<const double> x, std::vector<double>& y) {
  y.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) acc += a[static_cast<size_t>(i) * n + j] * x[j];
    y[i] = acc;
  }
}

// Differential-pair analog operator for a general real matrix: A is split
// into positive and negative parts, each scaled into [0,1] and programmed
// into its own array; apply() reads both and recombines.
struct AnalogOperator {
  PcmArray pos;
  PcmArray neg;
  double scale = 1.0;
  int n = 0;

  static AnalogOperator build(const std::vector<double>& a, int n, int replicas,
                              const PcmDeviceModel& model, RandomSource& rng) {
    double amax = 0.0;
    for (double v : a) amax = std::max(amax, std::fabs(v));
    if (amax == 0.0) amax = 1.0;
    std::vector<double> p(a.size()), m(a.size());
    for (size_t i = 0; i < a.size(); ++i) {
      p[i] = a[i] > 0 ? a[i] / amax : 0.0;
      m[i] = a[i] < 0 ? -a[i] / amax : 0.0;
    }
    PcmArray pos = PcmArray::program(p, n, n, replicas, model, rng);
    PcmArray neg = PcmArray::program(m, n, n, replicas, model, rng);
    return AnalogOperator{std::move(pos), std::move(neg), amax, n};
  }

  std::vector<double> apply(std::span<const double> x, RandomSource& rng, SolveCounts* counts) const {
    std::vector<double> yp = pos.matvec(x, rng);
    std::vector<double> ym = neg.matvec(x, rng);
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i) y[i] = scale * (yp[i] - ym[i]);
    if (counts) counts->analog_matvecs += 1;
    return y;
  }
};

struct SpdEstimate {
  double lambda_max;
  double lambda_min;
};

// power iteration on A and on (lambda_max I - A); SPD input assumed
SpdEstimate estimate_spectrum(const std::vector<double>& a, int n, RandomSource& rng) {
  std::vector<double> v(n), av;
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  double lmax = 0.0;
  for (int it = 0; it < 100; ++it) {
    gemv(a, n, v, av);
    double nn = norm2(av);
    if (nn == 0.0) return {0.0, 0.0};
    for (int i = 0; i < n; ++i) v[i] = av[i] / nn;
    lmax = nn;
  }
  // Rayleigh quotient refinement
  gemv(a, n, v, av);
  double num = 0.0;
  for (int i = 0; i < n; ++i) num += v[i] * av[i];
  lmax = num;

  std::vector<double> w(n), bw(n);
  for (auto& x : w) x = rng.uniform(-1.0, 1.0);
  double mu = 0.0;
  for (int it = 0; it < 100; ++it) {
    gemv(a, n, w, bw);
    for (int i = 0; i < n; ++i) bw[i] = lmax * w[i] - bw[i];
    double nn = norm2(bw);
    if (nn == 0.0) { mu = 0.0; break; }
    for (int i = 0; i < n; ++i) w[i] = bw[i] / nn;
    mu = nn;
  }
  return {lmax, lmax - mu};
}

void check_square_symmetric(const std::vector<double>& a, int n) {
  if (n <= 0 || a.size() != static_cast<size_t>(n) * n) {
    throw std::invalid_argument("solver: matrix is not n x n");
  }
  double amax = 0.0;
  for (double v : a) {
    if (!std::isfinite(v)) throw std::invalid_argument("solver: non-finite matrix entry");
    amax = std::max(amax, std::fabs(v));
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (std::fabs(a[static_cast<size_t>(i) * n + j] - a[static_cast<size_t>(j) * n + i]) >
          1e-12 * std::max(1.0, amax)) {
        throw std::invalid_argument("solver: matrix must be symmetric");
      }
    }
  }
}

} // namespace

void PcmDeviceModel::validate() const {
  if (write_noise_sigma < 0 || read_noise_sigma < 0) {
    throw std::invalid_argument("PcmDeviceModel: noise sigmas must be >= 0");
  }
  if (!(g_min < g_max)) throw std::invalid_argument("PcmDeviceModel: need g_min < g_max");
}

PcmArray PcmArray::program(std::span<const double> targets01, int rows, int cols, int replicas,
                           const PcmDeviceModel& model, RandomSource& rng) {
  model.validate();
  if (rows <= 0 || cols <= 0 || replicas < 1) throw std::invalid_argument("PcmArray: bad shape");
  if (targets01.size() != static_cast<size_t>(rows) * cols) {
    throw std::invalid_argument("PcmArray: target size mismatch");
  }
  for (double t : targets01) {
    if (!(t >= 0.0 && t <= 1.0)) {
      throw std::out_of_range("PcmArray: targets must lie in [0, 1]");
    }
  }
  PcmArray arr;
  arr.rows_ = rows;
  arr.cols_ = cols;
  arr.replicas_ = replicas;
  arr.model_ = model;
  arr.conductance_.resize(targets01.size() * replicas);
  const double span = model.g_max - model.g_min;
  for (size_t e = 0; e < targets01.size(); ++e) {
    double g_target = model.g_min + targets01[e] * span;
    for (int k = 0; k < replicas; ++k) {
      double g = g_target * (1.0 + rng.gaussian(model.write_noise_sigma));
      g = std::clamp(g, model.g_min, model.g_max);
      arr.conductance_[e * replicas + k] = g;
    }
  }
  return arr;
}

double PcmArray::stored(int i, int j, int k) const {
  size_t e = (static_cast<size_t>(i) * cols_ + j) * replicas_ + k;
  return (conductance_[e] - model_.g_min) / (model_.g_max - model_.g_min);
}

std::vector<double> PcmArray::matvec(std::span<const double> x, RandomSource& rng) const {
  if (x.size() != static_cast<size_t>(cols_)) {
    throw std::invalid_argument("PcmArray::matvec: length mismatch");
  }
  std::vector<double> y(rows_, 0.0);
  const double span = model_.g_max - model_.g_min;
  for (int i = 0; i < rows_; ++i) {
    double acc = 0.0;
    for (int k = 0; k < replicas_; ++k) {
      for (int j = 0; j < cols_; ++j) {
        size_t e = (static_cast<size_t>(i) * cols_ + j) * replicas_ + k;
        double g = conductance_[e] * (1.0 + rng.gaussian(model_.read_noise_sigma));
        acc += (g - model_.g_min) / span * x[j];
      }
    }
    y[i] = static_cast<double>(static_cast<float>(acc / replicas_));
  }
  return y;
}

ScalarExperimentResult scalar_experiment(int replicas, int trials, const PcmDeviceModel& model,
                                         RandomSource& rng) {
  if (replicas < 1 || trials < 1) throw std::invalid_argument("scalar_experiment: bad sizes");
  ScalarExperimentResult res;
  res.errors.reserve(trials);
  double sum = 0.0;
  for (int t = 0; t < trials; ++t) {
    double beta = rng.uniform();
    double gamma = rng.uniform();
    double cell[1] = {beta};
    PcmArray arr = PcmArray::program(cell, 1, 1, replicas, model, rng);
    double input[1] = {gamma};
    double theta_hat = arr.matvec(input, rng)[0];
    // reference goes through the same float32 readout rounding
    double theta = static_cast<double>(static_cast<float>(beta * gamma));
    double err = theta_hat - theta;
    res.errors.push_back(err);
    sum += err;
  }
  res.mean = sum / trials;
  double ss = 0.0;
  for (double e : res.errors) ss += (e - res.mean) * (e - res.mean);
  res.stddev = trials > 1 ? std::sqrt(ss / (trials - 1)) : 0.0;
  return res;
}

SolveResult mixed_precision_solve(const std::vector<double>& a, int n, const std::vector<double>& b,
                                  int replicas, const PcmDeviceModel& model, double tol,
                                  int max_outer, RandomSource& rng, int inner_iterations) {
  check_square_symmetric(a, n);
  if (b.size() != static_cast<size_t>(n)) throw std::invalid_argument("solver: rhs length mismatch");
  if (tol <= 0 || max_outer < 1 || inner_iterations < 1) {
    throw std::invalid_argument("solver: bad tolerance or iteration bounds");
  }

  SolveResult res;
  SpdEstimate spec = estimate_spectrum(a, n, rng);
  if (!(spec.lambda_min > 0.0) || spec.lambda_max / spec.lambda_min >= 1e6) {
    throw std::domain_error("solver: matrix is singular or too ill-conditioned (estimate " +
                            std::to_string(spec.lambda_max / std::max(spec.lambda_min, 1e-300)) + ")");
  }
  const double omega = 2.0 / (spec.lambda_max + spec.lambda_min);

  AnalogOperator op = AnalogOperator::build(a, n, replicas, model, rng);

  double bnorm = norm2(b);
  if (bnorm == 0.0) {
    res.x.assign(n, 0.0);
    res.converged = true;
    res.residual_history.push_back(0.0);
    return res;
  }

  std::vector<double> x(n, 0.0), r = b, ax, best_x = x;
  double best_rel = HUGE_VAL;
  double prev_rel = HUGE_VAL;
  for (int outer = 1; outer <= max_outer; ++outer) {
    // inner: Richardson on A c = r, matvecs analog only
    std::vector<double> c(n, 0.0);
    for (int t = 0; t < inner_iterations; ++t) {
      std::vector<double> v = op.apply(c, rng, &res.counts);
      for (int i = 0; i < n; ++i) c[i] += omega * (r[i] - v[i]);
      res.counts.digital_flops += 3L * n;
    }
    for (int i = 0; i < n; ++i) x[i] += c[i];
    res.counts.digital_flops += n;

    gemv(a, n, x, ax);
    for (int i = 0; i < n; ++i) r[i] = b[i] - ax[i];
    res.counts.digital_flops += 2L * n * n + n;
    double rel = norm2(r) / bnorm;
    res.counts.digital_flops += 2L * n;
    res.residual_history.push_back(rel);
    res.outer_iterations = outer;
    if (rel < best_rel) {
      best_rel = rel;
      best_x = x;
    }
    if (rel <= tol) {
      res.converged = true;
      break;
    }
    if (rel >= prev_rel) {
      res.stagnated = true; // noise floor reached before the tolerance
      break;
    }
    prev_rel = rel;
  }
  res.x = best_x;
  return res;
}

std::vector<double> analog_only_solve(const std::vector<double>& a, int n,
                                      const std::vector<double>& b, int replicas,
                                      const PcmDeviceModel& model, int iterations,
                                      RandomSource& rng) {
  check_square_symmetric(a, n);
  SpdEstimate spec = estimate_spectrum(a, n, rng);
  if (!(spec.lambda_min > 0.0)) throw std::domain_error("analog_only_solve: not positive definite");
  const double omega = 2.0 / (spec.lambda_max + spec.lambda_min);
  AnalogOperator op = AnalogOperator::build(a, n, replicas, model, rng);
  std::vector<double> x(n, 0.0);
  for (int t = 0; t < iterations; ++t) {
    std::vector<double> v = op.apply(x, rng, nullptr);
    for (int i = 0; i < n; ++i) x[i] += omega * (b[i] - v[i]);
  }
  return x;
}

std::vector<double> make_spd_matrix(int n, double lambda_min, double lambda_max, RandomSource& rng) {
  if (n <= 0 || !(lambda_min > 0.0) || !(lambda_max >= lambda_min)) {
    throw std::invalid_argument("make_spd_matrix: bad spectrum");
  }
  // random orthogonal basis: Gram-Schmidt on a Gaussian matrix
  std::vector<double> q(static_cast<size_t>(n) * n);
  for (auto& v : q) v = rng.gaussian(1.0);
  for (int c = 0; c < n; ++c) {
    for (int p = 0; p < c; ++p) {
      double dot = 0.0;
      for (int i = 0; i < n; ++i) dot += q[static_cast<size_t>(i) * n + c] * q[static_cast<size_t>(i) * n + p];
      for (int i = 0; i < n; ++i) q[static_cast<size_t>(i) * n + c] -= dot * q[static_cast<size_t>(i) * n + p];
    }
    double nn = 0.0;
    for (int i = 0; i < n; ++i) nn += q[static_cast<size_t>(i) * n + c] * q[static_cast<size_t>(i) * n + c];
    nn = std::sqrt(nn);
    if (nn < 1e-12) throw std::runtime_error("make_spd_matrix: degenerate basis draw");
    for (int i = 0; i < n; ++i) q[static_cast<size_t>(i) * n + c] /= nn;
  }
  std::vector<double> lambda(n);
  for (int i = 0; i < n; ++i) {
    lambda[i] = n == 1 ? lambda_max : lambda_min + (lambda_max - lambda_min) * rng.uniform();
  }
  lambda[0] = lambda_min;
  lambda[n - 1] = lambda_max;
  std::vector<double> a(static_cast<size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) {
        s += q[static_cast<size_t>(i) * n + k] * lambda[k] * q[static_cast<size_t>(j) * n + k];
      }
      a[static_cast<size_t>(i) * n + j] = s;
      a[static_cast<size_t>(j) * n + i] = s;
    }
  }
  return a;
}

PcmRunOutcome run_pcm_config(const Config& cfg, std::ostream& os, uint64_t default_seed) {
  PcmDeviceModel model;
  model.write_noise_sigma = cfg.get_double("write_noise", 0.02);
  model.read_noise_sigma = cfg.get_double("read_noise", 0.01);
  model.validate();
  int replicas = static_cast<int>(cfg.get_int("K", 4));
  RandomSource rng(cfg.get_u64("seed", default_seed));
  std::string mode = cfg.get_string("mode", "scalar");
  char buf[64];

  PcmRunOutcome outcome;
  if (mode == "scalar") {
    int trials = static_cast<int>(cfg.get_int("trials", 1024));
    ScalarExperimentResult res = scalar_experiment(replicas, trials, model, rng);
    os << "trial,error\n";
    for (size_t i = 0; i < res.errors.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, res.errors[i]);
      os << buf;
    }
  } else if (mode == "solve") {
    int n = static_cast<int>(cfg.get_int("n", 100));
    double tol = cfg.get_double("tol", 1e-10);
    int max_outer = static_cast<int>(cfg.get_int("max_outer", 20));
    int inner = static_cast<int>(cfg.get_int("inner_iterations", 10));
    std::vector<double> a = make_spd_matrix(n, cfg.get_double("lambda_min", 0.3),
                                            cfg.get_double("lambda_max", 1.0), rng);
    std::vector<double> b(n);
    for (auto& v : b) v = rng.uniform(-1.0, 1.0);
    SolveResult res = mixed_precision_solve(a, n, b, replicas, model, tol, max_outer, rng, inner);
    os << "outer,relative_residual\n";
    for (size_t i = 0; i < res.residual_history.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i + 1, res.residual_history[i]);
      os << buf;
    }
    outcome.stagnated = res.stagnated && !res.converged;
  } else {
    throw std::runtime_error("config: mode must be scalar or solve");
  }
  return outcome;
}

} // namespace mpx

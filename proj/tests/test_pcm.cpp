#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "mpx/pcm.hpp"

using namespace mpx;

namespace {

constexpr PcmDeviceModel noiseless{0.0, 0.0, 0.0, 1.0};
constexpr PcmDeviceModel realistic{0.02, 0.01, 0.0, 1.0};

// test-side oracle: float64 LU solve with partial pivoting, independent of
// the solver under test
std::vector<double> lu_solve(std::vector<double> a, int n, std::vector<double> b) {
  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int i = k + 1; i < n; ++i) {
      if (std::fabs(a[(size_t)i * n + k]) > std::fabs(a[(size_t)piv * n + k])) piv = i;
    }
    if (piv != k) {
      for (int j = 0; j < n; ++j) std::swap(a[(size_t)k * n + j], a[(size_t)piv * n + j]);
      std::swap(b[k], b[piv]);
    }
    REQUIRE(a[(size_t)k * n + k] != 0.0);
    for (int i = k + 1; i < n; ++i) {
      double f = a[(size_t)i * n + k] / a[(size_t)k * n + k];
      for (int j = k; j < n; ++j) a[(size_t)i * n + j] -= f * a[(size_t)k * n + j];
      b[i] -= f * b[k];
    }
  }
  std::vector<double> x(n);
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int j = i + 1; j < n; ++j) s -= a[(size_t)i * n + j] * x[j];
    x[i] = s / a[(size_t)i * n + i];
  }
  return x;
}

double rel_error(const std::vector<double>& x, const std::vector<double>& ref) {
  double num = 0, den = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    num += (x[i] - ref[i]) * (x[i] - ref[i]);
    den += ref[i] * ref[i];
  }
  return std::sqrt(num / den);
}

} // namespace

TEST_CASE("programming and readout") {
  RandomSource rng(1);
  // zero write noise stores targets exactly
  std::vector<double> t{0.0, 0.25, 0.5, 1.0};
  PcmArray a = PcmArray::program(t, 2, 2, 3, noiseless, rng);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 3; ++k) CHECK(a.stored(i, j, k) == t[(size_t)i * 2 + j]);

  // K = 1 keeps a single device per element
  PcmArray single = PcmArray::program(t, 2, 2, 1, realistic, rng);
  CHECK(single.replicas() == 1);

  // replica mean approaches the target as K grows (seeded statistical check)
  const int K = 64;
  std::vector<double> tt{0.5};
  double sum = 0.0;
  PcmArray many = PcmArray::program(tt, 1, 1, K, realistic, rng);
  for (int k = 0; k < K; ++k) sum += many.stored(0, 0, k);
  double mean = sum / K;
  CHECK(std::fabs(mean - 0.5) <= 3.0 * 0.02 * 0.5 / std::sqrt(K));

  CHECK_THROWS_AS(PcmArray::program(std::vector<double>{1.5}, 1, 1, 1, realistic, rng),
                  std::out_of_range);
  CHECK_THROWS_AS(PcmArray::program(std::vector<double>{-0.1}, 1, 1, 1, realistic, rng),
                  std::out_of_range);
  PcmDeviceModel bad{-1.0, 0.0, 0.0, 1.0};
  CHECK_THROWS_AS(PcmArray::program(t, 2, 2, 1, bad, rng), std::invalid_argument);
}

TEST_CASE("analog matvec") {
  RandomSource rng(2);
  std::vector<double> t{0.5, 0.25, 0.125, 1.0};
  PcmArray a = PcmArray::program(t, 2, 2, 4, noiseless, rng);
  // zero input -> zero output regardless of noise
  PcmArray noisy = PcmArray::program(t, 2, 2, 4, realistic, rng);
  std::vector<double> zero{0.0, 0.0};
  for (double v : noisy.matvec(zero, rng)) CHECK(v == 0.0);

  // noiseless: exact matvec up to the float32 readout rounding
  std::vector<double> x{1.0, 2.0};
  std::vector<double> y = a.matvec(x, rng);
  CHECK(y[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(y[1] == doctest::Approx(2.125).epsilon(1e-6));
  CHECK_THROWS_AS(a.matvec(std::vector<double>{1.0}, rng), std::invalid_argument);

  // error std shrinks like 1/sqrt(K) when K goes 1 -> 4
  auto spread = [&](int K) {
    RandomSource r(77);
    std::vector<double> tt{0.7};
    std::vector<double> in{1.0};
    const int reps = 4000;
    double s = 0, s2 = 0;
    for (int i = 0; i < reps; ++i) {
      PcmArray arr = PcmArray::program(tt, 1, 1, K, realistic, r);
      double v = arr.matvec(in, r)[0] - 0.7;
      s += v;
      s2 += v * v;
    }
    double m = s / reps;
    return std::sqrt(s2 / reps - m * m);
  };
  double s1 = spread(1), s4 = spread(4);
  CHECK(s1 / s4 == doctest::Approx(2.0).epsilon(0.25));
}

TEST_CASE("scalar multiplication experiment") {
  // zero noise: every recorded error is exactly zero
  RandomSource rng(3);
  ScalarExperimentResult clean = scalar_experiment(4, 256, noiseless, rng);
  for (double e : clean.errors) CHECK(e == 0.0);

  // realistic noise: zero mean within 3 sigma / sqrt(N), std ~ K^-0.5
  ScalarExperimentResult r1 = scalar_experiment(1, 1024, realistic, rng);
  ScalarExperimentResult r4 = scalar_experiment(4, 1024, realistic, rng);
  ScalarExperimentResult r16 = scalar_experiment(16, 1024, realistic, rng);
  CHECK(r1.errors.size() == 1024);
  for (const auto* r : {&r1, &r4, &r16}) {
    CHECK(std::fabs(r->mean) <= 3.0 * r->stddev / std::sqrt(1024.0));
  }
  CHECK(r1.stddev / r4.stddev == doctest::Approx(2.0).epsilon(0.25));
  CHECK(r1.stddev / r16.stddev == doctest::Approx(4.0).epsilon(0.25));
}

TEST_CASE("identity system converges immediately without noise") {
  RandomSource rng(4);
  int n = 8;
  std::vector<double> eye((size_t)n * n, 0.0);
  for (int i = 0; i < n; ++i) eye[(size_t)i * n + i] = 1.0;
  std::vector<double> b(n);
  for (auto& v : b) v = rng.uniform(-1.0, 1.0);
  // at readout-grade tolerance, one outer pass is enough
  SolveResult one = mixed_precision_solve(eye, n, b, 1, noiseless, 1e-6, 10, rng);
  CHECK(one.converged);
  CHECK(one.outer_iterations == 1);
  CHECK(one.residual_history.size() == 1);
  // the float32 analog readout caps one pass near 1e-8, so the full 1e-10
  // tolerance costs one more correction
  RandomSource rng_tight(4);
  SolveResult res = mixed_precision_solve(eye, n, b, 1, noiseless, 1e-10, 10, rng_tight);
  CHECK(res.converged);
  CHECK(res.outer_iterations <= 2);
  for (int i = 0; i < n; ++i) CHECK(res.x[i] == doctest::Approx(b[i]).epsilon(1e-12));
  // with noise the identity still converges, just not in one step
  RandomSource rng2(5);
  SolveResult noisy = mixed_precision_solve(eye, n, b, 4, realistic, 1e-10, 30, rng2);
  CHECK(noisy.converged);
  CHECK(rel_error(noisy.x, b) <= 1e-9);
}

TEST_CASE("noise-free refinement contracts geometrically") {
  RandomSource rng(6);
  int n = 100;
  std::vector<double> a = make_spd_matrix(n, 0.3, 1.0, rng);
  std::vector<double> b(n);
  for (auto& v : b) v = rng.uniform(-1.0, 1.0);
  SolveResult res = mixed_precision_solve(a, n, b, 1, noiseless, 1e-10, 10, rng);
  CHECK(res.converged);
  CHECK(res.outer_iterations <= 5);
  CHECK(res.residual_history.back() <= 1e-10);
  for (size_t i = 1; i < res.residual_history.size(); ++i) {
    CHECK(res.residual_history[i] < res.residual_history[i - 1]);
  }
  // solution matches the LU oracle
  std::vector<double> ref = lu_solve(a, n, b);
  CHECK(rel_error(res.x, ref) <= 1e-9);
}

TEST_CASE("noisy hybrid solve reaches float64-grade residuals") {
  RandomSource rng(7);
  int n = 100;
  std::vector<double> a = make_spd_matrix(n, 0.3, 1.0, rng);
  std::vector<double> b(n);
  for (auto& v : b) v = rng.uniform(-1.0, 1.0);
  SolveResult res = mixed_precision_solve(a, n, b, 4, realistic, 1e-10, 40, rng);
  CHECK(res.converged);
  CHECK(res.residual_history.back() <= 1e-10);
  std::vector<double> ref = lu_solve(a, n, b);
  CHECK(rel_error(res.x, ref) <= 1e-8);

  // the analog arm alone is stuck orders of magnitude higher
  RandomSource rng2(7);
  std::vector<double> analog = analog_only_solve(a, n, b, 4, realistic, 200, rng2);
  CHECK(rel_error(analog, ref) > 1e-2);
}

TEST_CASE("operation counts") {
  RandomSource rng(8);
  int n = 8;
  std::vector<double> eye((size_t)n * n, 0.0);
  for (int i = 0; i < n; ++i) eye[(size_t)i * n + i] = 1.0;
  std::vector<double> b(n, 1.0);
  SolveResult res = mixed_precision_solve(eye, n, b, 1, noiseless, 1e-10, 10, rng, 10);
  // one outer pass: 10 inner analog matvecs, one residual evaluation
  CHECK(res.counts.analog_matvecs == 10);
  CHECK(res.counts.digital_flops >= 2 * n * n);
  // deterministic given the seed
  RandomSource rng2(8);
  SolveResult again = mixed_precision_solve(eye, n, b, 1, noiseless, 1e-10, 10, rng2, 10);
  CHECK(again.counts.analog_matvecs == res.counts.analog_matvecs);
  CHECK(again.counts.digital_flops == res.counts.digital_flops);
  CHECK(again.residual_history == res.residual_history);
  // analog work grows with inner iterations and outer passes
  RandomSource rng3(9);
  int m = 50;
  std::vector<double> a = make_spd_matrix(m, 0.3, 1.0, rng3);
  std::vector<double> bb(m, 1.0);
  SolveResult few = mixed_precision_solve(a, m, bb, 1, noiseless, 1e-10, 40, rng3, 3);
  RandomSource rng4(9);
  SolveResult many = mixed_precision_solve(a, m, bb, 1, noiseless, 1e-10, 40, rng4, 12);
  CHECK(few.counts.analog_matvecs == 3L * few.outer_iterations);
  CHECK(many.counts.analog_matvecs == 12L * many.outer_iterations);
  CHECK(few.outer_iterations > many.outer_iterations);
}

TEST_CASE("solver rejects bad systems and flags stagnation") {
  RandomSource rng(10);
  // non-symmetric
  std::vector<double> ns{1.0, 2.0, 0.0, 1.0};
  CHECK_THROWS_AS(mixed_precision_solve(ns, 2, {1.0, 1.0}, 1, noiseless, 1e-10, 5, rng),
                  std::invalid_argument);
  // singular (rank 1)
  std::vector<double> sing{1.0, 1.0, 1.0, 1.0};
  CHECK_THROWS_AS(mixed_precision_solve(sing, 2, {1.0, 1.0}, 1, noiseless, 1e-10, 5, rng),
                  std::domain_error);
  // indefinite
  std::vector<double> indef{1.0, 0.0, 0.0, -1.0};
  CHECK_THROWS_AS(mixed_precision_solve(indef, 2, {1.0, 1.0}, 1, noiseless, 1e-10, 5, rng),
                  std::domain_error);
  // monstrous read noise stalls the refinement before the tolerance
  int n = 30;
  std::vector<double> a = make_spd_matrix(n, 0.3, 1.0, rng);
  std::vector<double> b(n, 1.0);
  PcmDeviceModel loud{0.3, 0.3, 0.0, 1.0};
  SolveResult res = mixed_precision_solve(a, n, b, 1, loud, 1e-10, 50, rng);
  CHECK(!res.converged);
  CHECK(res.stagnated);
  CHECK(res.residual_history.back() > 1e-10);
}

TEST_CASE("read-noise floor rises monotonically with sigma") {
  // common random numbers: the same seed scales the same draws, write noise
  // held at zero
  RandomSource rng(11);
  int n = 40;
  std::vector<double> a = make_spd_matrix(n, 0.3, 1.0, rng);
  std::vector<double> b(n, 1.0);
  std::vector<double> ref = lu_solve(a, n, b);
  double prev = -1.0;
  for (double sigma : {0.001, 0.005, 0.02, 0.08}) {
    PcmDeviceModel m{0.0, sigma, 0.0, 1.0};
    RandomSource r(123);
    std::vector<double> x = analog_only_solve(a, n, b, 2, m, 120, r);
    double err = rel_error(x, ref);
    CHECK(err > prev);
    prev = err;
  }
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "mpx/fixed_point.hpp"

using namespace mpx;

namespace {

const FixedFormat q32(3, 2);   // eps = 0.25
const FixedFormat q312(3, 12); // eps = 2^-12

// distance-scan oracle: walk every grid point in range, find the floor and
// the nearest by brute force
struct GridScan {
  double floor_v;
  double nearest_v;
  bool tie;
};

GridScan scan(double x, const FixedFormat& fmt) {
  GridScan g{-HUGE_VAL, 0.0, false};
  double best = HUGE_VAL;
  for (int64_t raw = fmt.raw_min(); raw <= fmt.raw_max(); ++raw) {
    double v = std::ldexp(static_cast<double>(raw), -fmt.fraction_bits);
    if (v <= x) g.floor_v = v;
    double d = std::fabs(x - v);
    if (d < best) {
      best = d;
      g.nearest_v = v;
      g.tie = false;
    } else if (d == best) {
      g.tie = true;
    }
  }
  return g;
}

} // namespace

TEST_CASE("format invariants") {
  CHECK(q32.epsilon() == 0.25);
  CHECK(q312.epsilon() == std::ldexp(1.0, -12));
  CHECK(q32.raw_max() == 31);
  CHECK(q32.raw_min() == -32);
  FixedFormat u(3, 2, false);
  CHECK(u.raw_min() == 0);
  CHECK_THROWS_AS(FixedFormat(60, 10), std::invalid_argument);
}

TEST_CASE("floor_to_grid") {
  CHECK(floor_to_grid(0.3, q32).value() == 0.25);
  CHECK(floor_to_grid(0.25, q32).value() == 0.25);
  CHECK(floor_to_grid(-0.3, q32).value() == -0.5); // floor toward -inf
  RandomSource rng(3);
  for (int i = 0; i < 2000; ++i) {
    double x = rng.uniform(-8.0, 7.75);
    CHECK(floor_to_grid(x, q32).value() == scan(x, q32).floor_v);
  }
  CHECK_THROWS_AS(floor_to_grid(100.0, q32), std::out_of_range);
  CHECK_THROWS_AS(floor_to_grid(-100.0, q32), std::out_of_range);
}

TEST_CASE("round_nearest with ties to even raw") {
  CHECK(round_nearest(0.3, q32).value() == 0.25);
  CHECK(round_nearest(0.25, q32).value() == 0.25); // on grid
  // 0.375 ties between raw 1 (0.25) and raw 2 (0.5): even raw wins
  CHECK(round_nearest(0.375, q32).raw == 2);
  CHECK(round_nearest(0.125, q32).raw == 0);
  CHECK(round_nearest(-0.125, q32).raw == 0);
  CHECK(round_nearest(-0.375, q32).raw == -2);
  RandomSource rng(4);
  for (int i = 0; i < 2000; ++i) {
    double x = rng.uniform(-8.0, 7.75);
    GridScan g = scan(x, q32);
    double got = round_nearest(x, q32).value();
    if (!g.tie) CHECK(got == g.nearest_v);
    else CHECK((round_nearest(x, q32).raw & 1) == 0);
    CHECK(std::fabs(got - x) <= q32.epsilon() / 2);
  }
}

TEST_CASE("round_stochastic probabilities") {
  RandomSource rng(123);
  // on grid -> deterministic
  for (int i = 0; i < 100; ++i) CHECK(round_stochastic(0.5, q32, rng).value() == 0.5);

  // x = 0.3: P(0.25) = 0.8, tolerance 0.004 at N = 1e5
  const int N = 100000;
  int low = 0;
  for (int i = 0; i < N; ++i) {
    if (round_stochastic(0.3, q32, rng).value() == 0.25) ++low;
  }
  double p = static_cast<double>(low) / N;
  CHECK(std::fabs(p - 0.8) <= 0.004);

  // unbiasedness: |mean - x| < 3 eps / (2 sqrt(N)) for random x
  for (int t = 0; t < 10; ++t) {
    double x = rng.uniform(-7.5, 7.5);
    double sum = 0.0;
    for (int i = 0; i < N; ++i) sum += round_stochastic(x, q32, rng).value();
    double mean = sum / N;
    CHECK(std::fabs(mean - x) < 3.0 * q32.epsilon() / (2.0 * std::sqrt(N)));
  }

  // error always strictly below eps
  for (int i = 0; i < 2000; ++i) {
    double x = rng.uniform(-8.0, 7.75);
    CHECK(std::fabs(round_stochastic(x, q32, rng).value() - x) < q32.epsilon());
  }
}

TEST_CASE("determinism and draw alignment") {
  RandomSource a(77), b(77);
  std::vector<int64_t> ra, rb;
  for (int i = 0; i < 500; ++i) {
    double x = 0.025 * i - 6.0; // mixes on-grid and off-grid inputs
    ra.push_back(round_stochastic(x, q312, a).raw);
  }
  for (int i = 0; i < 500; ++i) {
    double x = 0.025 * i - 6.0;
    rb.push_back(round_stochastic(x, q312, b).raw);
  }
  CHECK(ra == rb);
  // one extra draw desynchronizes an identically-seeded source: on-grid
  // inputs must still consume their draw for this to hold
  RandomSource c(77);
  (void)c.uniform();
  bool all_same = true;
  for (int i = 0; i < 500; ++i) {
    double x = 0.025 * i - 6.0;
    if (round_stochastic(x, q312, c).raw != ra[i]) all_same = false;
  }
  CHECK(!all_same);
}

TEST_CASE("arithmetic: add exact, mul rounds the exact double-width product") {
  RandomSource rng(9);
  FixedValue a = round_nearest(0.25, q32);
  FixedValue b = round_nearest(0.25, q32);
  CHECK(fixed_add(a, b).value() == 0.5);
  CHECK(fixed_mul(round_nearest(0.5, q32), round_nearest(0.5, q32), FixedRounding::Nearest, rng).value() == 0.25);

  // 0.75 * 0.75 = 0.5625: nearest -> 0.5 (|0.5625-0.5| < |0.5625-0.75|)
  FixedValue c = round_nearest(0.75, q32);
  CHECK(fixed_mul(c, c, FixedRounding::Nearest, rng).value() == 0.5);
  // stochastic: P(0.5) = 0.75
  int low = 0;
  const int N = 100000;
  for (int i = 0; i < N; ++i) {
    if (fixed_mul(c, c, FixedRounding::Stochastic, rng).value() == 0.5) ++low;
  }
  CHECK(static_cast<double>(low) / N == doctest::Approx(0.75).epsilon(0.01));

  // saturation at the range bounds
  FixedValue big = round_nearest(7.75, q32);
  CHECK(fixed_add(big, big).raw == q32.raw_max());
  FixedValue nbig = round_nearest(-7.75, q32);
  CHECK(fixed_add(nbig, nbig).raw == q32.raw_min());
  CHECK(fixed_mul(big, big, FixedRounding::Nearest, rng).raw == q32.raw_max());
  CHECK(fixed_mul(big, nbig, FixedRounding::Nearest, rng).raw == q32.raw_min());

  FixedFormat other(2, 2);
  CHECK_THROWS_AS(fixed_add(big, FixedValue{other, 0}), std::invalid_argument);
}

TEST_CASE("grid closure under every operation") {
  RandomSource rng(15);
  for (int i = 0; i < 2000; ++i) {
    double x = rng.uniform(-7.5, 7.5), y = rng.uniform(-7.5, 7.5);
    FixedValue a = round_stochastic(x, q32, rng);
    FixedValue b = round_nearest(y, q32);
    for (const FixedValue& v :
         {a, b, fixed_add(a, b), fixed_mul(a, b, FixedRounding::Stochastic, rng)}) {
      CHECK(v.raw >= q32.raw_min());
      CHECK(v.raw <= q32.raw_max());
      CHECK(v.value() == std::ldexp(static_cast<double>(v.raw), -2));
    }
  }
}

TEST_CASE("unsigned raw layout matches the weighted bit sum, exhaustively") {
  // value = sum b_i 2^(i-n) over all m+n <= 12 widths
  for (int m = 1; m <= 6; ++m) {
    for (int n = 0; n <= 6; ++n) {
      FixedFormat fmt(m, n, false);
      for (int64_t raw = 0; raw <= fmt.raw_max(); ++raw) {
        double expect = 0.0;
        for (int i = 0; i < m + n; ++i) {
          if ((raw >> i) & 1) expect += std::ldexp(1.0, i - n);
        }
        CHECK(FixedValue{fmt, raw}.value() == expect);
      }
    }
  }
}

TEST_CASE("stochastic mul expectation equals the exact product") {
  RandomSource rng(2024);
  FixedValue a = round_nearest(1.3125, q32);
  FixedValue b = round_nearest(2.6875, q32);
  double exact = a.value() * b.value();
  const int N = 200000;
  double sum = 0.0;
  for (int i = 0; i < N; ++i) sum += fixed_mul(a, b, FixedRounding::Stochastic, rng).value();
  double mean = sum / N;
  CHECK(std::fabs(mean - exact) < 3.0 * q32.epsilon() / (2.0 * std::sqrt(N)));
}

TEST_CASE("random source basics") {
  RandomSource a(1), b(1);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  RandomSource r(55);
  for (int i = 0; i < 10000; ++i) {
    double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  // gaussian consumes exactly two draws
  RandomSource g1(9), g2(9);
  (void)g1.gaussian(1.0);
  (void)g2.uniform();
  (void)g2.uniform();
  CHECK(g1.next_u64() == g2.next_u64());
}

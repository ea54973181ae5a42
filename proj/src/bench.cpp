#include "mpx/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "mpx/linalg.hpp"
#include "mpx/random.hpp"

namespace mpx {

namespace {

uint64_t fnv1a(const void* data, size_t bytes, uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

template <typename T>
uint64_t native_matmul_checksum(int n, RandomSource& rng, double& seconds) {
  std::vector<T> a(static_cast<size_t>(n) * n), b(a.size()), c(a.size(), T(0));
  for (auto& v : a) v = static_cast<T>(rng.uniform(-1.0, 1.0));
  for (auto& v : b) v = static_cast<T>(rng.uniform(-1.0, 1.0));
  auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      T acc = T(0);
      for (int k = 0; k < n; ++k) {
        acc += a[static_cast<size_t>(i) * n + k] * b[static_cast<size_t>(k) * n + j];
      }
      c[static_cast<size_t>(i) * n + j] = acc;
    }
  }
  auto t1 = std::chrono::steady_clock::now();
  seconds = std::chrono::duration<double>(t1 - t0).count();
  return fnv1a(c.data(), c.size() * sizeof(T));
}

uint64_t half_matmul_checksum(int n, RandomSource& rng, double& seconds) {
  const FloatFormat& half = FloatFormat::half();
  Matrix a = Matrix::random_uniform(n, n, half, -1.0, 1.0, rng);
  Matrix b = Matrix::random_uniform(n, n, half, -1.0, 1.0, rng);
  auto t0 = std::chrono::steady_clock::now();
  Matrix c = gemm_uniform(a, b, half);
  auto t1 = std::chrono::steady_clock::now();
  seconds = std::chrono::duration<double>(t1 - t0).count();
  return fnv1a(c.data.data(), c.data.size() * sizeof(double));
}

} // namespace

void BenchConfig::validate() const {
  if (sizes.empty()) throw std::invalid_argument("bench: need at least one size");
  for (int n : sizes) {
    if (n < 1) throw std::invalid_argument("bench: sizes must be >= 1");
  }
  if (formats.empty()) throw std::invalid_argument("bench: need at least one format");
  for (const auto& f : formats) {
    if (f != "half" && f != "single" && f != "double") {
      throw std::invalid_argument("bench: unknown format '" + f + "'");
    }
  }
  if (repetitions < 3) throw std::invalid_argument("bench: repetitions must be >= 3");
  if (warmup < 0) throw std::invalid_argument("bench: warmup must be >= 0");
}

std::vector<BenchRecord> run_bench(const BenchConfig& cfg) {
  cfg.validate();
  std::vector<BenchRecord> out;
  for (const auto& fmt : cfg.formats) {
    for (int n : cfg.sizes) {
      // per-point seed so records do not depend on sweep order
      uint64_t point_seed = cfg.seed ^ (static_cast<uint64_t>(n) << 16) ^ fnv1a(fmt.data(), fmt.size());
      std::vector<double> times;
      uint64_t checksum = 0;
      for (int rep = 0; rep < cfg.warmup + cfg.repetitions; ++rep) {
        RandomSource rng(point_seed);
        double seconds = 0.0;
        uint64_t sum;
        if (fmt == "half") sum = half_matmul_checksum(n, rng, seconds);
        else if (fmt == "single") sum = native_matmul_checksum<float>(n, rng, seconds);
        else sum = native_matmul_checksum<double>(n, rng, seconds);
        if (rep >= cfg.warmup) times.push_back(seconds);
        checksum = sum; // same seed every rep, so identical across reps
      }
      std::sort(times.begin(), times.end());
      BenchRecord rec;
      rec.format = fmt;
      rec.n = n;
      rec.min_s = times.front();
      rec.max_s = times.back();
      rec.median_s = times[times.size() / 2];
      rec.checksum = checksum;
      out.push_back(rec);
    }
  }
  return out;
}

void write_bench_csv(std::ostream& os, const std::vector<BenchRecord>& records) {
  os << "format,N,median_s,min_s,max_s,checksum\n";
  char buf[160];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%s,%d,%.17g,%.17g,%.17g,%016llx\n", r.format.c_str(), r.n,
                  r.median_s, r.min_s, r.max_s, static_cast<unsigned long long>(r.checksum));
    os << buf;
  }
}

} // namespace mpx

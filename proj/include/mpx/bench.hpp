#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mpx/formats.hpp"

namespace mpx {

/// Matrix-multiply timing sweep. Half runs through the software arithmetic
/// (there is no native half on ordinary CPUs, which is the point); single
/// and double use the host's native arithmetic with the same triple loop.
struct BenchConfig {
  std::vector<int> sizes;                      // N values
  std::vector<std::string> formats;            // subset of {half, single, double}
  int repetitions = 5;
  int warmup = 1;
  uint64_t seed = 1;

  void validate() const;
};

struct BenchRecord {
  std::string format;
  int n;
  double median_s;
  double min_s;
  double max_s;
  uint64_t checksum; // FNV-1a over the result bits, defeats dead-code elimination
};

std::vector<BenchRecord> run_bench(const BenchConfig& cfg);

/// `format,N,median_s,min_s,max_s,checksum` rows with a header.
void write_bench_csv(std::ostream& os, const std::vector<BenchRecord>& records);

} // namespace mpx

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "mpx/bench.hpp"
#include "mpx/config.hpp"
#include "mpx/pcm.hpp"
#include "mpx/training.hpp"

using namespace mpx;

TEST_CASE("config parsing") {
  Config c = Config::parse_string(
      "# a comment\n"
      "alpha = 3\n"
      "name=blobs  # trailing comment\n"
      "\n"
      "lr = 0.5\n"
      "flag = true\n"
      "list = 2,16,2\n");
  CHECK(c.get_int("alpha") == 3);
  CHECK(c.get_string("name") == "blobs");
  CHECK(c.get_double("lr") == 0.5);
  CHECK(c.get_bool("flag", false));
  CHECK(c.get_int_list("list") == std::vector<int>{2, 16, 2});
  CHECK(c.get_int("missing", 9) == 9);
  CHECK_THROWS(c.get_int("missing"));
  CHECK_THROWS(c.get_int("name"));
  CHECK_THROWS(Config::parse_string("no equals sign here\n"));
  CHECK_THROWS(Config::parse_string("=value\n"));
  CHECK_THROWS(Config::parse_file("/nonexistent/path.conf"));
}

TEST_CASE("training setup from config") {
  Config c = Config::parse_string(
      "layer_sizes=2,16,2\n"
      "storage=fixed\n"
      "fixed_m=3\n"
      "fixed_n=12\n"
      "rounding=stochastic\n"
      "epochs=5\n"
      "batch_size=16\n"
      "learning_rate=0.1\n"
      "seed=42\n"
      "dataset=blobs\n"
      "dataset_samples=128\n");
  TrainingSetup s = setup_from_config(c);
  CHECK(s.layer_sizes == std::vector<int>{2, 16, 2});
  CHECK(s.policy.storage == StorageKind::Fixed);
  CHECK(s.policy.rounding == FixedRounding::Stochastic);
  CHECK(s.policy.fixed_format.fraction_bits == 12);
  CHECK(s.options.epochs == 5);
  CHECK(s.options.seed == 42);
  CHECK(s.data.train.size() + s.data.test.size() == 128);
  // same config, same data
  TrainingSetup s2 = setup_from_config(c);
  CHECK(s.data.train.features == s2.data.train.features);
  TrainingReport r = run_training(s);
  TrainingReport r2 = run_training(s2);
  CHECK(r.epochs.size() == r2.epochs.size());
  CHECK(r.epochs.back().test_accuracy == r2.epochs.back().test_accuracy);

  Config bad = Config::parse_string("layer_sizes=2,16,2\nstorage=float8\n");
  CHECK_THROWS(setup_from_config(bad));
  Config mismatched = Config::parse_string("layer_sizes=5,16,2\ndataset=blobs\n");
  CHECK_THROWS(setup_from_config(mismatched));
  // float16 with stochastic rounding is rejected by policy validation
  Config wronground = Config::parse_string("layer_sizes=2,4,2\nstorage=float16\nrounding=stochastic\n");
  CHECK_THROWS(setup_from_config(wronground));
}

TEST_CASE("report csv shape") {
  Config c = Config::parse_string(
      "layer_sizes=2,8,2\nepochs=2\nseed=3\ndataset_samples=96\nbatch_size=16\n");
  TrainingReport r = run_training(setup_from_config(c));
  std::stringstream ss;
  write_report_csv(ss, r);
  std::string line;
  std::getline(ss, line);
  CHECK(line == "epoch,loss,test_accuracy,zero_flushed_count,clipped_count");
  int rows = 0;
  while (std::getline(ss, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == 3); // initial row + 2 epochs
}

TEST_CASE("pcm config front end") {
  Config scalar = Config::parse_string("mode=scalar\nK=2\ntrials=16\nseed=5\n");
  std::stringstream ss;
  PcmRunOutcome o = run_pcm_config(scalar, ss);
  CHECK(!o.stagnated);
  std::string line;
  std::getline(ss, line);
  CHECK(line == "trial,error");
  int rows = 0;
  while (std::getline(ss, line)) ++rows;
  CHECK(rows == 16);

  Config solve = Config::parse_string(
      "mode=solve\nn=20\nK=2\nwrite_noise=0\nread_noise=0\ntol=1e-10\nmax_outer=10\nseed=5\n");
  std::stringstream s2;
  PcmRunOutcome o2 = run_pcm_config(solve, s2);
  CHECK(!o2.stagnated);
  std::getline(s2, line);
  CHECK(line == "outer,relative_residual");
  double last = 1.0;
  while (std::getline(s2, line)) {
    auto comma = line.find(',');
    last = std::stod(line.substr(comma + 1));
  }
  CHECK(last <= 1e-10);

  Config bad = Config::parse_string("mode=warp\n");
  std::stringstream s3;
  CHECK_THROWS(run_pcm_config(bad, s3));
}

TEST_CASE("bench config validation and record invariants") {
  BenchConfig cfg;
  cfg.sizes = {1, 4};
  cfg.formats = {"half", "single", "double"};
  cfg.repetitions = 3;
  cfg.warmup = 0;
  cfg.seed = 9;
  auto records = run_bench(cfg);
  CHECK(records.size() == 6);
  for (const auto& r : records) {
    CHECK(r.min_s <= r.median_s);
    CHECK(r.median_s <= r.max_s);
    CHECK(r.min_s >= 0.0);
  }
  // N = 1 rows exist for every format
  int n1 = 0;
  for (const auto& r : records) {
    if (r.n == 1) ++n1;
  }
  CHECK(n1 == 3);
  // checksums are seed-deterministic
  auto again = run_bench(cfg);
  for (size_t i = 0; i < records.size(); ++i) CHECK(records[i].checksum == again[i].checksum);

  BenchConfig bad = cfg;
  bad.repetitions = 2;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.formats = {"float8"};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.sizes = {0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  std::stringstream ss;
  write_bench_csv(ss, records);
  std::string line;
  std::getline(ss, line);
  CHECK(line == "format,N,median_s,min_s,max_s,checksum");
}

// mpx — mixed-precision numerics workbench
//
// Subcommands: inspect (bit-level view of one value), bench (matmul timing
// sweep), density (per-binade value counts), train (precision-policy MLP
// runs), pcm (analog crossbar experiments). All structured output is CSV.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>

#include "mpx/bench.hpp"
#include "mpx/bit_pattern.hpp"
#include "mpx/codec.hpp"
#include "mpx/config.hpp"
#include "mpx/pcm.hpp"
#include "mpx/training.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitDivergence = 4;
constexpr int kExitStagnation = 5;

struct OutputStream {
  std::ofstream file;
  std::ostream* os = &std::cout;

  void open(const std::string& path) {
    if (path.empty() || path == "-") return;
    file.open(path);
    if (!file) throw std::runtime_error("cannot open output file: " + path);
    os = &file;
  }
};

const char* class_name(mpx::FloatClass c) {
  switch (c) {
    case mpx::FloatClass::Zero: return "zero";
    case mpx::FloatClass::Subnormal: return "subnormal";
    case mpx::FloatClass::Normal: return "normal";
    case mpx::FloatClass::Infinity: return "infinity";
    case mpx::FloatClass::NaN: return "nan";
  }
  return "?";
}

void run_inspect(const std::string& input, const std::string& format_name, std::ostream& os) {
  mpx::FloatFormat fmt = mpx::FloatFormat::by_name(format_name);
  mpx::BitPattern p = mpx::looks_like_pattern(input, fmt)
                          ? mpx::parse_pattern(input, fmt)
                          : mpx::encode_decimal(input, fmt);
  mpx::ExtendedReal v = mpx::decode(p, fmt);
  mpx::FloatClass cls = mpx::classify(p, fmt);

  os << "format     = " << fmt.name() << " (1/" << fmt.exponent_bits << "/" << fmt.fraction_bits
     << ", bias " << fmt.bias << ")\n";
  os << "pattern    = " << mpx::format_pattern(p, fmt) << "\n";
  os << "hex        = " << mpx::format_pattern_hex(p) << "\n";
  os << "class      = " << class_name(cls) << "\n";
  os << "value      = " << mpx::decimal_string(v) << "\n";
  os << "decimal20  = " << mpx::decimal_string(v, 20) << "\n";
  if (v.is_finite()) os << "dyadic     = " << v.value().to_string() << "\n";
  if (cls != mpx::FloatClass::NaN) {
    mpx::BitPattern up = mpx::next_up(p, fmt);
    mpx::BitPattern down = mpx::next_down(p, fmt);
    os << "next_up    = " << mpx::format_pattern(up, fmt) << "  ("
       << mpx::decimal_string(mpx::decode(up, fmt), 6) << ")\n";
    os << "next_down  = " << mpx::format_pattern(down, fmt) << "  ("
       << mpx::decimal_string(mpx::decode(down, fmt), 6) << ")\n";
  }
}

void run_density(const std::string& format_name, long from, long to, bool have_range,
                 std::ostream& os) {
  mpx::FloatFormat fmt = mpx::FloatFormat::by_name(format_name);
  long lo = have_range ? from : fmt.min_normal_exponent();
  long hi = have_range ? to : fmt.max_normal_exponent();
  if (lo > hi || lo < fmt.min_normal_exponent() || hi > fmt.max_normal_exponent()) {
    throw std::runtime_error("density: range outside the normal exponents [" +
                             std::to_string(fmt.min_normal_exponent()) + ", " +
                             std::to_string(fmt.max_normal_exponent()) + "]");
  }
  os << "n,count\n";
  if (fmt.total_bits <= 16) {
    // exhaustive: count decoded finite values per binade
    auto all = mpx::enumerate(fmt);
    for (long n = lo; n <= hi; ++n) {
      mpx::Dyadic lo_edge(1, n), hi_edge(1, n + 1);
      long count = 0;
      for (const auto& [pat, val] : all) {
        if (!val.is_finite()) continue;
        const mpx::Dyadic& d = val.value();
        if (d >= lo_edge && d < hi_edge) ++count;
      }
      os << n << "," << count << "\n";
    }
  } else {
    for (long n = lo; n <= hi; ++n) {
      os << n << "," << mpx::binade_count(fmt, static_cast<int>(n)).get_str() << "\n";
    }
  }
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"mixed-precision numerics workbench"};
  app.require_subcommand(1);
  app.fallthrough(); // let --seed/--out/--config appear after the subcommand

  uint64_t seed = 1;
  std::string out_path;
  std::string config_path;
  app.add_option("--seed", seed, "random seed");
  app.add_option("--out", out_path, "output path (default stdout)");
  app.add_option("--config", config_path, "key=value config file");

  auto* c_inspect = app.add_subcommand("inspect", "decode a bit pattern or decimal value");
  std::string inspect_value, inspect_format = "single";
  c_inspect->add_option("value", inspect_value, "0x..., grouped bits, or a decimal number")->required();
  c_inspect->add_option("--format", inspect_format, "half|single|double|quadruple|octuple|e<E>f<F>");

  auto* c_bench = app.add_subcommand("bench", "time N x N matrix products");
  std::vector<int> bench_sizes{30, 60, 120, 200};
  std::vector<std::string> bench_formats{"half", "single", "double"};
  int bench_reps = 5, bench_warmup = 1;
  c_bench->add_option("--sizes", bench_sizes, "matrix sizes")->delimiter(',');
  c_bench->add_option("--formats", bench_formats, "half,single,double subset")->delimiter(',');
  c_bench->add_option("--reps", bench_reps, "timed repetitions per point (>= 3)");
  c_bench->add_option("--warmup", bench_warmup, "discarded warmup runs");

  auto* c_density = app.add_subcommand("density", "representable values per binade");
  std::string density_format = "half";
  long density_from = 0, density_to = 0;
  c_density->add_option("--format", density_format, "format name");
  auto* opt_from = c_density->add_option("--from", density_from, "first binade exponent");
  c_density->add_option("--to", density_to, "last binade exponent")->needs(opt_from);

  auto* c_train = app.add_subcommand("train", "run a precision-policy training config");
  auto* c_pcm = app.add_subcommand("pcm", "run a crossbar experiment config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  OutputStream out;
  try {
    out.open(out_path);

    if (c_inspect->parsed()) {
      try {
        run_inspect(inspect_value, inspect_format, *out.os);
      } catch (const std::invalid_argument& e) {
        std::cerr << "mpx inspect: " << e.what() << "\n";
        return kExitUsage;
      }
      return 0;
    }

    if (c_bench->parsed()) {
      mpx::BenchConfig cfg;
      cfg.sizes = bench_sizes;
      cfg.formats = bench_formats;
      cfg.repetitions = bench_reps;
      cfg.warmup = bench_warmup;
      cfg.seed = seed;
      try {
        cfg.validate();
      } catch (const std::invalid_argument& e) {
        std::cerr << "mpx bench: " << e.what() << "\n";
        return kExitUsage;
      }
      mpx::write_bench_csv(*out.os, mpx::run_bench(cfg));
      return 0;
    }

    if (c_density->parsed()) {
      try {
        run_density(density_format, density_from, density_to, opt_from->count() > 0, *out.os);
      } catch (const std::exception& e) {
        std::cerr << "mpx density: " << e.what() << "\n";
        return kExitUsage;
      }
      return 0;
    }

    if (c_train->parsed()) {
      if (config_path.empty()) {
        std::cerr << "mpx train: --config is required\n";
        return kExitUsage;
      }
      mpx::Config cfg = mpx::Config::parse_file(config_path);
      // the global flag seeds the run unless the config pins its own
      mpx::TrainingSetup setup = mpx::setup_from_config(cfg, seed);
      mpx::TrainingReport report = mpx::run_training(setup);
      mpx::write_report_csv(*out.os, report);
      return report.diverged ? kExitDivergence : 0;
    }

    if (c_pcm->parsed()) {
      if (config_path.empty()) {
        std::cerr << "mpx pcm: --config is required\n";
        return kExitUsage;
      }
      mpx::Config cfg = mpx::Config::parse_file(config_path);
      mpx::PcmRunOutcome outcome = mpx::run_pcm_config(cfg, *out.os, seed);
      return outcome.stagnated ? kExitStagnation : 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "mpx: " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}

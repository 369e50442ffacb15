#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "harness.hpp"
#include "sbbf/filter.hpp"
#include "sbbf/model.hpp"
#include "sbbf/persist.hpp"

namespace {

using namespace sbbf;
using namespace sbbf::cli;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitCheckFailed = 3;

unsigned threads_from_env() {
  const char* raw = std::getenv("SBBF_THREADS");
  if (raw == nullptr || *raw == '\0') {
    return 1;
  }
  char* end = nullptr;
  const long value = std::strtol(raw, &end, 10);
  if (end == nullptr || *end != '\0' || value < 1 || value > 256) {
    throw UsageError("SBBF_THREADS must be an integer between 1 and 256");
  }
  return static_cast<unsigned>(value);
}

void print_report(const BenchReport& report) {
  std::printf("%-8s ndv=%llu bytes=%llu threads=%u rate=%.1f M/s measured_fpp=%.6f "
              "model_fpp=%.6f wall=%.3fs\n",
              report.op.c_str(), static_cast<unsigned long long>(report.ndv),
              static_cast<unsigned long long>(report.filter_bytes), report.threads,
              report.million_ops_per_sec, report.measured_fpp, report.model_fpp,
              report.wall_time_s);
}

void emit_report(const BenchReport& report, const std::string& csv_path, bool json) {
  if (json) {
    std::cout << to_json(report).dump(2) << '\n';
  } else {
    print_report(report);
  }
  if (!csv_path.empty()) {
    append_csv(csv_path, report);
  }
}

struct FppSimCli {
  ExperimentSpec spec;
  std::uint64_t bytes = 0;
  double fpp = 0.0;
  std::string key_mode = "random64";
  std::string csv_path;
  bool json = false;
  bool huge = false;
  bool bytes_set = false;
  bool fpp_set = false;
};

int cmd_fpp_sim(FppSimCli& cli) {
  if (cli.bytes_set) {
    cli.spec.filter_bytes = cli.bytes;
  }
  if (cli.fpp_set) {
    cli.spec.target_fpp = cli.fpp;
  }
  if (cli.key_mode == "random64") {
    cli.spec.key_mode = KeyMode::kRandom64;
  } else if (cli.key_mode == "strings") {
    cli.spec.key_mode = KeyMode::kByteStrings;
  } else {
    throw UsageError("--key-mode must be 'random64' or 'strings'");
  }
  cli.spec.huge_ok = cli.huge;
  const BenchReport report = run_fpp_sim(cli.spec);
  emit_report(report, cli.csv_path, cli.json);
  if (!cli.json) {
    const double ratio =
        report.model_fpp > 0.0 ? report.measured_fpp / report.model_fpp : 0.0;
    std::printf("measured/model fpp ratio: %.3f\n", ratio);
  }
  return kExitOk;
}

struct ModelCli {
  ModelOptions options;
  std::string csv_path;
  bool json = false;
  bool assert_2x = false;
};

int cmd_model(const ModelCli& cli) {
  const FppRatioReport report = run_model(cli.options);
  if (cli.json) {
    std::cout << to_json(report).dump(2) << '\n';
  } else {
    std::printf("%10s %14s %14s %14s %10s\n", "a", "bits_per_key", "sbbf_fpp",
                "standard_fpp", "ratio");
    for (const FppRatioRow& row : report.rows) {
      std::printf("%10.3f %14.4f %14.6g %14.6g %10.4f\n", row.a, row.bits_per_key, row.sbbf,
                  row.standard, row.ratio);
    }
    std::printf("max ratio: %.4f\n", report.max_ratio);
  }
  if (!cli.csv_path.empty()) {
    std::ofstream out(cli.csv_path);
    if (!out) {
      throw PersistError(PersistErrc::kIo, "cannot open " + cli.csv_path);
    }
    out << "a,bits_per_key,sbbf_fpp,standard_fpp,ratio\n";
    out.precision(10);
    for (const FppRatioRow& row : report.rows) {
      out << row.a << ',' << row.bits_per_key << ',' << row.sbbf << ',' << row.standard << ','
          << row.ratio << '\n';
    }
  }
  if (cli.assert_2x && report.max_ratio > kWithin2xBound) {
    std::fprintf(stderr, "FAIL: max sbbf/standard fpp ratio %.4f exceeds %.2f\n",
                 report.max_ratio, kWithin2xBound);
    return kExitCheckFailed;
  }
  return kExitOk;
}

struct SizeCli {
  std::uint64_t ndv = 0;
  double fpp = 0.0;
  bool json = false;
};

int cmd_size(const SizeCli& cli) {
  const SizingResult result = size_for(cli.ndv, cli.fpp);
  if (cli.json) {
    std::cout << to_json(result).dump(2) << '\n';
  } else {
    std::printf("ndv=%llu target_fpp=%g -> buckets=%llu bytes=%llu (a=%.3f, predicted "
                "fpp=%.6f)\n",
                static_cast<unsigned long long>(cli.ndv), cli.fpp,
                static_cast<unsigned long long>(result.num_buckets),
                static_cast<unsigned long long>(result.bytes), result.a, result.predicted_fpp);
  }
  if (result.outside_efficient_range) {
    std::fprintf(stderr,
                 "warning: target fpp %g is outside the efficient range [0.4%%, 19%%] of the "
                 "eight-lane layout; the filter will be correct but oversized relative to "
                 "other designs\n",
                 cli.fpp);
  }
  return kExitOk;
}

struct BenchCli {
  BenchOptions options;
  std::string csv_path;
  bool json = false;
  bool huge = false;
};

int cmd_bench(BenchCli& cli) {
  cli.options.threads = threads_from_env();
  cli.options.huge_ok = cli.huge;
  const BenchResult result = run_bench(cli.options);
  if (cli.json) {
    std::cout << to_json(result).dump(2) << '\n';
  } else {
    print_report(result.insert);
    print_report(result.lookup);
    if (result.per_thread_mops.size() > 1) {
      for (std::size_t t = 0; t < result.per_thread_mops.size(); ++t) {
        std::printf("  lookup thread %zu: %.1f M/s\n", t, result.per_thread_mops[t]);
      }
    }
  }
  if (!cli.csv_path.empty()) {
    append_csv(cli.csv_path, result.insert);
    append_csv(cli.csv_path, result.lookup);
  }
  return kExitOk;
}

struct BuildCli {
  std::string key_file;
  std::string out_file;
  double fpp = 0.01;
};

int cmd_build(const BuildCli& cli) {
  const BuildResult result = run_build(cli.key_file, cli.out_file, cli.fpp);
  std::printf("read %llu keys (%llu distinct hashes), wrote %llu bytes to %s "
              "(predicted fpp %.6f)\n",
              static_cast<unsigned long long>(result.keys_read),
              static_cast<unsigned long long>(result.distinct_hashes),
              static_cast<unsigned long long>(image_size(result.sizing.num_buckets)),
              cli.out_file.c_str(), result.sizing.predicted_fpp);
  if (result.sizing.outside_efficient_range) {
    std::fprintf(stderr, "warning: target fpp %g is outside the efficient range [0.4%%, 19%%]\n",
                 cli.fpp);
  }
  return kExitOk;
}

struct QueryCli {
  std::string filter_file;
  std::string key_file;
};

int cmd_query(const QueryCli& cli) {
  const QueryResult result = run_query(cli.filter_file, cli.key_file, std::cout);
  std::fprintf(stderr, "%llu keys: %llu maybe, %llu absent\n",
               static_cast<unsigned long long>(result.keys),
               static_cast<unsigned long long>(result.maybe),
               static_cast<unsigned long long>(result.keys - result.maybe));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"split block Bloom filter toolkit: build filters, validate the "
               "false-positive model, size for a target rate, benchmark throughput"};
  app.require_subcommand(1);

  FppSimCli sim;
  auto* sim_cmd = app.add_subcommand(
      "fpp-sim", "insert ndv keys, probe disjoint keys, compare measured vs model fpp");
  sim_cmd->add_option("--ndv", sim.spec.ndv, "keys to insert")->required();
  auto* sim_bytes = sim_cmd->add_option("--bytes", sim.bytes, "filter size in bytes");
  auto* sim_fpp = sim_cmd->add_option("--fpp", sim.fpp, "target false-positive rate");
  sim_cmd->add_option("--queries", sim.spec.negative_queries, "negative queries (default 1e6)");
  sim_cmd->add_option("--seed", sim.spec.seed, "hash seed (default 1)");
  sim_cmd->add_option("--key-mode", sim.key_mode, "random64 | strings");
  sim_cmd->add_option("--csv", sim.csv_path, "append the report to this CSV file");
  sim_cmd->add_flag("--json", sim.json, "print the report as JSON");
  sim_cmd->add_flag("--huge", sim.huge, "allow paper-scale runs (>10M keys)");

  ModelCli model;
  auto* model_cmd = app.add_subcommand(
      "model", "tabulate sbbf fpp against a same-space standard Bloom filter");
  model_cmd->add_option("--a-min", model.options.a_min, "low end of the density grid");
  model_cmd->add_option("--a-max", model.options.a_max, "high end of the density grid");
  model_cmd->add_option("--steps", model.options.steps, "grid points (default 65)");
  model_cmd->add_option("--csv", model.csv_path, "write the table to this CSV file");
  model_cmd->add_flag("--json", model.json, "print the table as JSON");
  model_cmd->add_flag("--assert-2x", model.assert_2x,
                      "exit 3 unless max ratio <= 2.1 over the grid");

  SizeCli size;
  auto* size_cmd =
      app.add_subcommand("size", "bytes needed for a key count and target fpp");
  size_cmd->add_option("--ndv", size.ndv, "distinct keys")->required();
  size_cmd->add_option("--fpp", size.fpp, "target false-positive rate")->required();
  size_cmd->add_flag("--json", size.json, "print the sizing as JSON");

  BenchCli bench;
  auto* bench_cmd = app.add_subcommand(
      "bench", "time bulk insert and lookup over pre-generated hashes");
  bench_cmd->add_option("--ndv", bench.options.ndv, "keys to insert")->required();
  bench_cmd->add_option("--bytes", bench.options.filter_bytes, "filter size in bytes")
      ->required();
  bench_cmd->add_option("--reps", bench.options.reps, "repetitions, median reported (>= 3)");
  bench_cmd->add_option("--seed", bench.options.seed, "hash seed (default 1)");
  bench_cmd->add_option("--csv", bench.csv_path, "append insert/lookup rows to this CSV file");
  bench_cmd->add_flag("--json", bench.json, "print the reports as JSON");
  bench_cmd->add_flag("--huge", bench.huge, "allow paper-scale runs (>10M keys)");

  BuildCli build;
  auto* build_cmd = app.add_subcommand(
      "build", "hash a newline-delimited key file into a filter image");
  build_cmd->add_option("key_file", build.key_file, "newline-delimited keys")->required();
  build_cmd->add_option("out_file", build.out_file, "filter image to write")->required();
  build_cmd->add_option("--fpp", build.fpp, "target false-positive rate (default 0.01)");

  QueryCli query;
  auto* query_cmd = app.add_subcommand(
      "query", "print maybe/absent for each key in a file ('absent' is definitive)");
  query_cmd->add_option("filter_file", query.filter_file, "filter image")->required();
  query_cmd->add_option("key_file", query.key_file, "newline-delimited keys")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (sim_cmd->parsed()) {
      sim.bytes_set = sim_bytes->count() > 0;
      sim.fpp_set = sim_fpp->count() > 0;
      return cmd_fpp_sim(sim);
    }
    if (model_cmd->parsed()) {
      return cmd_model(model);
    }
    if (size_cmd->parsed()) {
      return cmd_size(size);
    }
    if (bench_cmd->parsed()) {
      return cmd_bench(bench);
    }
    if (build_cmd->parsed()) {
      return cmd_build(build);
    }
    if (query_cmd->parsed()) {
      return cmd_query(query);
    }
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const PersistError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  }
  return kExitUsage;
}

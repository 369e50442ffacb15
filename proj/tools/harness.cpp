#include "harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include "sbbf/filter.hpp"
#include "sbbf/hash.hpp"
#include "sbbf/persist.hpp"

namespace sbbf::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

constexpr std::uint64_t kNegativeCounterBase = std::uint64_t{1} << 32;

std::uint64_t resolve_buckets(const ExperimentSpec& spec) {
  if (spec.filter_bytes.has_value() == spec.target_fpp.has_value()) {
    throw UsageError("exactly one of --bytes or --fpp must be given");
  }
  if (spec.filter_bytes) {
    if (*spec.filter_bytes < kBlockBytes) {
      throw UsageError("--bytes must be at least 32 (one block)");
    }
    return *spec.filter_bytes / kBlockBytes;
  }
  if (*spec.target_fpp <= 0.0 || *spec.target_fpp >= 1.0) {
    throw UsageError("--fpp must lie strictly between 0 and 1");
  }
  return spec.ndv == 0 ? 1 : size_for(spec.ndv, *spec.target_fpp).num_buckets;
}

void check_scale(std::uint64_t ndv, bool huge_ok) {
  if (ndv > kNegativeCounterBase) {
    throw UsageError("--ndv must not exceed 2^32 (the negative-query key space starts there)");
  }
  if (ndv > kHugeNdvThreshold && !huge_ok) {
    throw UsageError("--ndv beyond 10M is paper scale; pass --huge to allow it");
  }
}

}  // namespace

std::uint64_t key_hash(std::uint64_t counter, KeyMode mode, std::uint64_t seed) {
  if (mode == KeyMode::kRandom64) {
    return hash_u64_key(counter, seed);
  }
  return hash_key(std::to_string(counter), seed);
}

BenchReport run_fpp_sim(const ExperimentSpec& spec) {
  check_scale(spec.ndv, spec.huge_ok);
  if (spec.negative_queries < 1) {
    throw UsageError("--queries must be positive");
  }
  if (spec.negative_queries > kNegativeCounterBase) {
    throw UsageError("--queries must not exceed 2^32");
  }
  const std::uint64_t buckets = resolve_buckets(spec);
  const double a = static_cast<double>(spec.ndv) / static_cast<double>(buckets);

  double model_fpp = 0.0;
  try {
    model_fpp = sbbf_fpp(a);
  } catch (const std::domain_error&) {
    throw UsageError("--bytes is far too small for --ndv; the model only covers a <= 1e6");
  }

  const auto start = Clock::now();
  SplitBlockFilter filter(buckets, kHasherXxh64);
  for (std::uint64_t c = 0; c < spec.ndv; ++c) {
    filter.add_hash(key_hash(c, spec.key_mode, spec.seed));
  }
  const double insert_seconds = seconds_since(start);

  std::uint64_t false_positives = 0;
  for (std::uint64_t i = 0; i < spec.negative_queries; ++i) {
    const std::uint64_t counter = kNegativeCounterBase + i;
    false_positives += filter.find_hash(key_hash(counter, spec.key_mode, spec.seed)) ? 1 : 0;
  }

  BenchReport report;
  report.op = "fpp-sim";
  report.ndv = spec.ndv;
  report.filter_bytes = filter.size_bytes();
  report.measured_fpp =
      static_cast<double>(false_positives) / static_cast<double>(spec.negative_queries);
  report.model_fpp = model_fpp;
  report.million_ops_per_sec =
      insert_seconds > 0.0 ? static_cast<double>(spec.ndv) / insert_seconds / 1e6 : 0.0;
  report.wall_time_s = seconds_since(start);
  return report;
}

FppRatioReport run_model(const ModelOptions& options) {
  if (!(options.a_min >= 0.0) || options.a_min > options.a_max) {
    throw UsageError("--a-min must satisfy 0 <= a-min <= a-max");
  }
  if (options.steps < 1) {
    throw UsageError("--steps must be at least 1");
  }
  if (options.steps == 1 && options.a_min != options.a_max) {
    throw UsageError("--steps 1 needs --a-min equal to --a-max");
  }
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(options.steps));
  for (int i = 0; i < options.steps; ++i) {
    const double t = options.steps == 1
                         ? 0.0
                         : static_cast<double>(i) / static_cast<double>(options.steps - 1);
    grid.push_back(options.a_min + t * (options.a_max - options.a_min));
  }
  return within_2x_report(grid);
}

BenchResult run_bench(const BenchOptions& options) {
  check_scale(options.ndv, options.huge_ok);
  if (options.reps < 3) {
    throw UsageError("--reps must be at least 3");
  }
  if (options.ndv < 1) {
    throw UsageError("--ndv must be positive");
  }
  if (options.filter_bytes < kBlockBytes) {
    throw UsageError("--bytes must be at least 32 (one block)");
  }
  if (options.threads < 1 || options.threads > 256) {
    throw UsageError("SBBF_THREADS must be between 1 and 256");
  }
  const std::uint64_t buckets = options.filter_bytes / kBlockBytes;

  // Hashes are pre-generated: the timed loops cover filter operations only.
  std::vector<std::uint64_t> hashes(options.ndv);
  for (std::uint64_t c = 0; c < options.ndv; ++c) {
    hashes[c] = key_hash(c, KeyMode::kRandom64, options.seed);
  }

  std::vector<double> insert_times;
  std::vector<double> lookup_times;
  std::vector<double> per_thread_last;
  SplitBlockFilter filter(buckets, kHasherXxh64);
  std::vector<std::uint8_t> results(options.ndv);

  for (int rep = 0; rep < options.reps; ++rep) {
    SplitBlockFilter fresh(buckets, kHasherXxh64);
    const auto insert_start = Clock::now();
    fresh.add_hashes(hashes);
    insert_times.push_back(seconds_since(insert_start));
    filter = std::move(fresh);

    if (options.threads == 1) {
      const auto lookup_start = Clock::now();
      filter.find_hashes(hashes, results.data());
      const double elapsed = seconds_since(lookup_start);
      lookup_times.push_back(elapsed);
      per_thread_last.assign(1, static_cast<double>(options.ndv) / elapsed / 1e6);
    } else {
      // Shard lookups over the read-only filter; no synchronization needed
      // once writers are done.
      const unsigned threads = options.threads;
      std::vector<double> shard_seconds(threads, 0.0);
      std::vector<std::uint64_t> shard_sizes(threads, 0);
      const auto lookup_start = Clock::now();
      {
        std::vector<std::jthread> workers;
        workers.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) {
          const std::uint64_t begin = options.ndv * t / threads;
          const std::uint64_t end = options.ndv * (t + 1) / threads;
          shard_sizes[t] = end - begin;
          workers.emplace_back([&, t, begin, end] {
            const auto shard_start = Clock::now();
            filter.find_hashes(std::span(hashes).subspan(begin, end - begin),
                               results.data() + begin);
            shard_seconds[t] = seconds_since(shard_start);
          });
        }
      }
      lookup_times.push_back(seconds_since(lookup_start));
      per_thread_last.clear();
      for (unsigned t = 0; t < threads; ++t) {
        per_thread_last.push_back(static_cast<double>(shard_sizes[t]) / shard_seconds[t] / 1e6);
      }
    }
  }

  // Everything inserted must be found; also keeps the lookups observable.
  std::uint64_t found = 0;
  for (const std::uint8_t r : results) {
    found += r;
  }
  if (found != options.ndv) {
    throw std::logic_error("benchmark lookups lost inserted keys");
  }

  // A cheap side measurement so the report carries the fpp columns too.
  const std::uint64_t fpp_probes = 100'000;
  std::uint64_t false_positives = 0;
  for (std::uint64_t i = 0; i < fpp_probes; ++i) {
    false_positives +=
        filter.find_hash(key_hash(kNegativeCounterBase + i, KeyMode::kRandom64, options.seed))
            ? 1
            : 0;
  }
  const double measured_fpp =
      static_cast<double>(false_positives) / static_cast<double>(fpp_probes);
  const double model_fpp =
      sbbf_fpp(static_cast<double>(options.ndv) / static_cast<double>(buckets));

  BenchResult result;
  result.insert.op = "insert";
  result.insert.ndv = options.ndv;
  result.insert.filter_bytes = buckets * kBlockBytes;
  result.insert.threads = 1;
  result.insert.measured_fpp = measured_fpp;
  result.insert.model_fpp = model_fpp;
  result.insert.wall_time_s = median(insert_times);
  result.insert.million_ops_per_sec =
      static_cast<double>(options.ndv) / result.insert.wall_time_s / 1e6;

  result.lookup = result.insert;
  result.lookup.op = "lookup";
  result.lookup.threads = options.threads;
  result.lookup.wall_time_s = median(lookup_times);
  result.lookup.million_ops_per_sec =
      static_cast<double>(options.ndv) / result.lookup.wall_time_s / 1e6;
  result.per_thread_mops = std::move(per_thread_last);
  return result;
}

std::vector<std::string> read_key_lines(const std::filesystem::path& key_file) {
  std::ifstream in(key_file, std::ios::binary);
  if (!in) {
    throw PersistError(PersistErrc::kIo, "cannot open key file " + key_file.string());
  }
  std::vector<std::string> keys;
  std::string line;
  while (std::getline(in, line)) {
    keys.push_back(line);
  }
  // std::getline drops the final segment only when the file ends in '\n',
  // which is exactly the convention: a final line without a newline is a key.
  return keys;
}

BuildResult run_build(const std::filesystem::path& key_file,
                      const std::filesystem::path& out_file, double target_fpp) {
  const std::vector<std::string> keys = read_key_lines(key_file);
  std::vector<std::uint64_t> hashes;
  hashes.reserve(keys.size());
  for (const std::string& key : keys) {
    hashes.push_back(hash_key(key, 0));
  }
  std::vector<std::uint64_t> distinct = hashes;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  BuildResult result;
  result.keys_read = keys.size();
  result.distinct_hashes = distinct.size();
  result.sizing = size_for(std::max<std::uint64_t>(1, distinct.size()), target_fpp);

  SplitBlockFilter filter(result.sizing.num_buckets, kHasherXxh64);
  filter.add_hashes(hashes);
  save_filter(filter, out_file);
  return result;
}

QueryResult run_query(const std::filesystem::path& filter_file,
                      const std::filesystem::path& key_file, std::ostream& out) {
  const SplitBlockFilter filter = load_filter(filter_file);
  if (filter.hasher_id() != kHasherXxh64) {
    throw UsageError("filter " + filter_file.string() + " was built with hasher id " +
                     std::to_string(filter.hasher_id()) +
                     "; this tool queries with hasher id 1 (bundled XXH64)");
  }
  QueryResult result;
  for (const std::string& key : read_key_lines(key_file)) {
    ++result.keys;
    if (filter.find_hash(hash_key(key, 0))) {
      ++result.maybe;
      out << "maybe\n";
    } else {
      out << "absent\n";
    }
  }
  return result;
}

std::string csv_header() {
  return "op,ndv,filter_bytes,threads,million_ops_per_sec,measured_fpp,model_fpp,wall_time_s";
}

std::string csv_row(const BenchReport& report) {
  std::ostringstream row;
  row.precision(10);
  row << report.op << ',' << report.ndv << ',' << report.filter_bytes << ',' << report.threads
      << ',' << report.million_ops_per_sec << ',' << report.measured_fpp << ','
      << report.model_fpp << ',' << report.wall_time_s;
  return row.str();
}

void append_csv(const std::filesystem::path& path, const BenchReport& report) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) {
    throw PersistError(PersistErrc::kIo, "cannot open " + path.string() + " for appending");
  }
  if (fresh) {
    out << csv_header() << '\n';
  }
  out << csv_row(report) << '\n';
  if (!out) {
    throw PersistError(PersistErrc::kIo, "write to " + path.string() + " failed");
  }
}

nlohmann::json to_json(const BenchReport& report) {
  return nlohmann::json{
      {"op", report.op},
      {"ndv", report.ndv},
      {"filter_bytes", report.filter_bytes},
      {"threads", report.threads},
      {"million_ops_per_sec", report.million_ops_per_sec},
      {"measured_fpp", report.measured_fpp},
      {"model_fpp", report.model_fpp},
      {"wall_time_s", report.wall_time_s},
  };
}

nlohmann::json to_json(const FppRatioReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const FppRatioRow& row : report.rows) {
    rows.push_back({
        {"a", row.a},
        {"bits_per_key", row.bits_per_key},
        {"sbbf_fpp", row.sbbf},
        {"standard_fpp", row.standard},
        {"ratio", row.ratio},
    });
  }
  return nlohmann::json{{"rows", rows}, {"max_ratio", report.max_ratio}};
}

nlohmann::json to_json(const SizingResult& result) {
  return nlohmann::json{
      {"num_buckets", result.num_buckets},
      {"bytes", result.bytes},
      {"predicted_fpp", result.predicted_fpp},
      {"a", result.a},
      {"outside_efficient_range", result.outside_efficient_range},
  };
}

nlohmann::json to_json(const BenchResult& result) {
  return nlohmann::json{
      {"insert", to_json(result.insert)},
      {"lookup", to_json(result.lookup)},
      {"per_thread_lookup_mops", result.per_thread_mops},
  };
}

}  // namespace sbbf::cli

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sbbf/model.hpp"

namespace sbbf::cli {

/// Invalid experiment parameters; the message names the offending field.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class KeyMode {
  kRandom64,     ///< keys are 64-bit counters, hashed via their 8 LE bytes
  kByteStrings,  ///< keys are the counters' decimal strings
};

/// False-positive experiments insert keys derived from counters [0, ndv) and
/// probe keys from counters [2^32, 2^32 + negative_queries): the two key
/// spaces are disjoint by construction, so every probe hit is a false
/// positive. The hash frontend (seeded XXH64) supplies the randomness.
struct ExperimentSpec {
  std::uint64_t ndv = 0;
  std::optional<std::uint64_t> filter_bytes;  ///< exactly one of this
  std::optional<double> target_fpp;           ///< ... and this
  std::uint64_t negative_queries = 1'000'000;
  std::uint64_t seed = 1;
  KeyMode key_mode = KeyMode::kRandom64;
  bool huge_ok = false;  ///< permits paper-scale (>10M key) runs
};

struct BenchReport {
  std::string op;  ///< "insert", "lookup", or "fpp-sim"
  double million_ops_per_sec = 0.0;
  std::uint64_t ndv = 0;
  std::uint64_t filter_bytes = 0;
  unsigned threads = 1;
  double measured_fpp = 0.0;
  double model_fpp = 0.0;
  double wall_time_s = 0.0;
};

/// The asserted bound for `model --assert-2x`: the paper's factor of two
/// plus 5% numerical headroom.
inline constexpr double kWithin2xBound = 2.1;

/// Anything past this key count needs an explicit opt-in (--huge).
inline constexpr std::uint64_t kHugeNdvThreshold = 10'000'000;

std::uint64_t key_hash(std::uint64_t counter, KeyMode mode, std::uint64_t seed);

BenchReport run_fpp_sim(const ExperimentSpec& spec);

struct ModelOptions {
  double a_min = 20.0;
  double a_max = 52.0;
  int steps = 65;
};

FppRatioReport run_model(const ModelOptions& options);

struct BenchOptions {
  std::uint64_t ndv = 0;
  std::uint64_t filter_bytes = 0;
  int reps = 5;
  unsigned threads = 1;
  std::uint64_t seed = 1;
  bool huge_ok = false;
};

struct BenchResult {
  BenchReport insert;
  BenchReport lookup;
  std::vector<double> per_thread_mops;  ///< lookup rate of each thread
};

BenchResult run_bench(const BenchOptions& options);

struct BuildResult {
  std::uint64_t keys_read = 0;
  std::uint64_t distinct_hashes = 0;
  SizingResult sizing;
};

/// Hashes every line of `key_file` with the bundled frontend (hasher id 1,
/// seed 0) and writes a sized filter image to `out_file`.
BuildResult run_build(const std::filesystem::path& key_file,
                      const std::filesystem::path& out_file, double target_fpp);

struct QueryResult {
  std::uint64_t keys = 0;
  std::uint64_t maybe = 0;
};

/// Prints one line per key: "maybe" or "absent". "absent" is definitive.
QueryResult run_query(const std::filesystem::path& filter_file,
                      const std::filesystem::path& key_file, std::ostream& out);

/// Newline-delimited key files: keys are the '\n'-separated segments; a file
/// ending without a newline still contributes its final segment.
std::vector<std::string> read_key_lines(const std::filesystem::path& key_file);

// Machine-readable output. CSV rows append; the header is written when the
// file is new or empty.
std::string csv_header();
std::string csv_row(const BenchReport& report);
void append_csv(const std::filesystem::path& path, const BenchReport& report);
nlohmann::json to_json(const BenchReport& report);
nlohmann::json to_json(const FppRatioReport& report);
nlohmann::json to_json(const SizingResult& result);
nlohmann::json to_json(const BenchResult& result);

}  // namespace sbbf::cli

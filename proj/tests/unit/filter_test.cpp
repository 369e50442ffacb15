#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "reference_filter.hpp"
#include "sbbf/filter.hpp"

using namespace sbbf;
using sbbf::testing::InstrumentedReferenceFilter;
using sbbf::testing::oracle_lane_bit;
using sbbf::testing::oracle_mask;
using sbbf::testing::oracle_mul_high;

TEST_CASE("block_index fixed vectors") {
  CHECK(block_index(0, 12345) == 0);
  CHECK(block_index(std::uint64_t{1} << 63, 4) == 2);
  // Frozen from a big-integer oracle: floor(h * n / 2^64).
  CHECK(block_index(0xDEADBEEFDEADBEEFull, 1000) == 869);
  CHECK(block_index(0xa00641a9f1e54a8bull, 7919) == 4950);
  CHECK(block_index(0xc693565f940af963ull, 7919) == 6142);
  CHECK(block_index(0x39a72dabd56a2742ull, 7919) == 1783);
  CHECK(block_index(0xdfa132d748fa2734ull, 7919) == 6917);
  CHECK(block_index(0xFFFFFFFFFFFFFFFFull, 1) == 0);
  CHECK(block_index(0xFFFFFFFFFFFFFFFFull, 1000) == 999);
}

TEST_CASE("block_index matches the limb-arithmetic oracle") {
  std::mt19937_64 rng(0x5eed0001);
  const std::uint64_t bucket_choices[] = {1,    2,      3,       7,          4096,
                                          1000, 999983, 1u << 20, (1ull << 40) + 17};
  for (int i = 0; i < 10000; ++i) {
    const std::uint64_t hash = rng();
    for (const std::uint64_t buckets : bucket_choices) {
      CAPTURE(hash);
      CAPTURE(buckets);
      const std::uint64_t got = block_index(hash, buckets);
      REQUIRE(got == oracle_mul_high(hash, buckets));
      REQUIRE(got < buckets);
    }
  }
}

TEST_CASE("block_index spreads hashes evenly over 7 buckets") {
  std::mt19937_64 rng(0x5eed0002);
  constexpr int kDraws = 1'000'000;
  constexpr std::uint64_t kBuckets = 7;
  std::array<std::int64_t, kBuckets> counts{};
  for (int i = 0; i < kDraws; ++i) {
    counts[block_index(rng(), kBuckets)]++;
  }
  const double expected = double(kDraws) / kBuckets;
  const double sigma = std::sqrt(kDraws * (1.0 / kBuckets) * (1.0 - 1.0 / kBuckets));
  for (const std::int64_t count : counts) {
    CHECK(std::abs(count - expected) <= 5.0 * sigma);
  }
}

TEST_CASE("make_mask fixed vectors") {
  SUBCASE("hash zero sets bit 0 in every lane") {
    const LaneMask mask = make_mask(0);
    for (const std::uint32_t lane : mask.lanes) {
      CHECK(lane == 0x00000001u);
    }
  }
  SUBCASE("hash one selects the top five bits of each seed") {
    const LaneMask mask = make_mask(1);
    const std::array<std::uint32_t, 8> expected_bits = {8, 8, 20, 17, 5, 14, 11, 19};
    for (std::size_t i = 0; i < kLanesPerBlock; ++i) {
      CHECK(expected_bits[i] == (kLaneSeeds[i] >> 27));
      CHECK(mask.lanes[i] == (std::uint32_t{1} << expected_bits[i]));
    }
  }
  SUBCASE("only the low 32 bits of the hash participate") {
    const LaneMask high_only = make_mask(0xFFFFFFFF00000000ull);
    for (const std::uint32_t lane : high_only.lanes) {
      CHECK(lane == 0x00000001u);
    }
    const LaneMask a = make_mask(0x00000000DEADBEEFull);
    const LaneMask b = make_mask(0x12345678DEADBEEFull);
    CHECK(a.lanes == b.lanes);
  }
  SUBCASE("frozen full masks") {
    const std::array<std::uint32_t, 8> dead = {0x00008000u, 0x20000000u, 0x00004000u,
                                               0x00001000u, 0x02000000u, 0x00002000u,
                                               0x00200000u, 0x01000000u};
    CHECK(make_mask(0xdeadbeefdeadbeefull).lanes == dead);
    const std::array<std::uint32_t, 8> seq = {0x00080000u, 0x00040000u, 0x00800000u,
                                              0x40000000u, 0x00010000u, 0x00000010u,
                                              0x01000000u, 0x00001000u};
    CHECK(make_mask(0x0123456789abcdefull).lanes == seq);
  }
}

TEST_CASE("make_mask matches the 64-bit-arithmetic oracle and keeps its shape") {
  std::mt19937_64 rng(0x5eed0003);
  for (int i = 0; i < 10000; ++i) {
    const std::uint64_t hash = rng();
    CAPTURE(hash);
    const LaneMask mask = make_mask(hash);
    const auto expected = oracle_mask(hash);
    for (std::size_t lane = 0; lane < kLanesPerBlock; ++lane) {
      REQUIRE(mask.lanes[lane] == expected[lane]);
      REQUIRE(std::popcount(mask.lanes[lane]) == 1);
    }
  }
}

TEST_CASE("construction") {
  SUBCASE("one bucket, all zero") {
    SplitBlockFilter filter(1);
    CHECK(filter.size_bytes() == 32);
    CHECK(filter.num_buckets() == 1);
    CHECK(filter.hasher_id() == 0);
    for (const Block& block : filter.blocks()) {
      CHECK(block == Block{});
    }
  }
  SUBCASE("the 100k-element configuration") {
    SplitBlockFilter filter(4096);
    CHECK(filter.size_bytes() == 131072);
  }
  SUBCASE("zero buckets is rejected") {
    CHECK_THROWS_AS(SplitBlockFilter(0), std::invalid_argument);
    CHECK_THROWS_AS(SplitBlockFilter::from_blocks({}), std::invalid_argument);
  }
}

TEST_CASE("add then find") {
  SplitBlockFilter filter(57);
  std::mt19937_64 rng(0x5eed0004);
  std::vector<std::uint64_t> hashes(1000);
  for (auto& h : hashes) {
    h = rng();
  }
  for (const auto h : hashes) {
    CHECK_FALSE(filter.find_hash(h));  // empty filter holds nothing
  }
  for (const auto h : hashes) {
    filter.add_hash(h);
  }
  for (const auto h : hashes) {
    CHECK(filter.find_hash(h));
  }
}

TEST_CASE("adding a hash twice does not change the filter") {
  SplitBlockFilter once(13);
  SplitBlockFilter twice(13);
  const std::uint64_t hash = 0x0123456789abcdefull;
  once.add_hash(hash);
  twice.add_hash(hash);
  twice.add_hash(hash);
  CHECK(once == twice);
}

TEST_CASE("add_hash(0) on a one-bucket filter sets bit 0 of every lane") {
  SplitBlockFilter filter(1);
  filter.add_hash(0);
  for (const std::uint32_t lane : filter.blocks()[0].lanes) {
    CHECK(lane == 0x00000001u);
  }
}

TEST_CASE("bulk operations are element-wise equivalents") {
  std::mt19937_64 rng(0x5eed0005);
  std::vector<std::uint64_t> hashes(1000);
  for (auto& h : hashes) {
    h = rng();
  }

  SUBCASE("empty batch is a no-op") {
    SplitBlockFilter filter(3);
    filter.add_hashes({});
    CHECK(filter == SplitBlockFilter(3));
    CHECK(filter.find_hashes({}).empty());
  }

  SUBCASE("bulk add/find agree with the scalar calls") {
    SplitBlockFilter bulk(97);
    SplitBlockFilter single(97);
    bulk.add_hashes(hashes);
    for (const auto h : hashes) {
      single.add_hash(h);
    }
    CHECK(bulk == single);

    std::vector<std::uint64_t> probes(hashes.begin(), hashes.begin() + 500);
    for (int i = 0; i < 500; ++i) {
      probes.push_back(rng());
    }
    const auto results = bulk.find_hashes(probes);
    REQUIRE(results.size() == probes.size());
    for (std::size_t i = 0; i < probes.size(); ++i) {
      CHECK(bool(results[i]) == single.find_hash(probes[i]));
    }
    for (std::size_t i = 0; i < 500; ++i) {
      CHECK(results[i] == 1);  // everything inserted is found
    }
  }
}

TEST_CASE("set bits only grow") {
  SplitBlockFilter filter(11);
  std::mt19937_64 rng(0x5eed0006);
  std::vector<std::uint64_t> added;
  int previous_popcount = 0;
  for (int step = 0; step < 200; ++step) {
    added.push_back(rng());
    filter.add_hash(added.back());
    int total = 0;
    for (const Block& block : filter.blocks()) {
      for (const std::uint32_t lane : block.lanes) {
        total += std::popcount(lane);
      }
    }
    CHECK(total >= previous_popcount);
    previous_popcount = total;
    for (const auto h : added) {
      REQUIRE(filter.find_hash(h));  // never transitions true -> false
    }
  }
}

TEST_CASE("scalar and vector backends build bit-identical filters") {
  if (!vector_backend_available()) {
    MESSAGE("AVX2 unavailable; vector backend not exercised");
    return;
  }
  SplitBlockFilter scalar(4096, 0, Backend::kScalar);
  SplitBlockFilter vector(4096, 0, Backend::kVector);
  CHECK(scalar.backend() == Backend::kScalar);
  CHECK(vector.backend() == Backend::kVector);

  std::mt19937_64 rng(0x5eed0007);
  std::vector<std::uint64_t> hashes(100'000);
  for (auto& h : hashes) {
    h = rng();
  }
  scalar.add_hashes(hashes);
  vector.add_hashes(hashes);
  REQUIRE(scalar == vector);

  std::vector<std::uint64_t> probes(hashes.begin(), hashes.begin() + 5000);
  for (int i = 0; i < 5000; ++i) {
    probes.push_back(rng());
  }
  const auto from_scalar = scalar.find_hashes(probes);
  const auto from_vector = vector.find_hashes(probes);
  CHECK(from_scalar == from_vector);
}

TEST_CASE("requesting the vector backend without CPU support fails loudly") {
  if (vector_backend_available()) {
    return;
  }
  CHECK_THROWS_AS(SplitBlockFilter(1, 0, Backend::kVector), std::runtime_error);
}

TEST_CASE("filter behavior matches the instrumented reference") {
  SplitBlockFilter filter(1000);
  InstrumentedReferenceFilter reference(1000);
  std::mt19937_64 rng(0x5eed0008);
  for (int i = 0; i < 5000; ++i) {
    const std::uint64_t hash = rng();
    filter.add_hash(hash);
    reference.add(hash);
  }
  for (int i = 0; i < 5000; ++i) {
    const std::uint64_t probe = rng();
    REQUIRE(filter.find_hash(probe) == reference.find(probe));
  }
}

TEST_CASE("every operation touches one block and computes eight lane hashes") {
  for (const std::uint64_t buckets : {std::uint64_t{1}, std::uint64_t{1000}}) {
    InstrumentedReferenceFilter reference(buckets);
    std::mt19937_64 rng(0x5eed0009);
    for (int i = 0; i < 100; ++i) {
      reference.reset_counters();
      reference.add(rng());
      CHECK(reference.blocks_touched == 1);
      CHECK(reference.lane_hashes == 8);
      reference.reset_counters();
      reference.find(rng());
      CHECK(reference.blocks_touched == 1);
      CHECK(reference.lane_hashes == 8);
    }
  }
}

TEST_CASE("single-block false-positive rate tracks the per-count model term") {
  // With 24 distinct hashes in one block, a lookup of an absent key hits with
  // probability (1 - (31/32)^24)^8 in expectation over the inserted set.
  // Averaging over many independent one-bucket filters makes the check
  // statistically sound; the spread of the per-filter rates supplies the
  // standard error.
  constexpr int kFilters = 256;
  constexpr int kQueriesPerFilter = 4096;
  constexpr int kInserts = 24;
  const double model = std::pow(1.0 - std::pow(31.0 / 32.0, kInserts), 8.0);

  std::mt19937_64 rng(0x5eed000a);
  std::vector<double> rates;
  rates.reserve(kFilters);
  for (int f = 0; f < kFilters; ++f) {
    SplitBlockFilter filter(1);
    for (int i = 0; i < kInserts; ++i) {
      filter.add_hash(rng());
    }
    int hits = 0;
    for (int q = 0; q < kQueriesPerFilter; ++q) {
      hits += filter.find_hash(rng()) ? 1 : 0;
    }
    rates.push_back(double(hits) / kQueriesPerFilter);
  }
  double mean = 0;
  for (const double r : rates) {
    mean += r;
  }
  mean /= kFilters;
  double var = 0;
  for (const double r : rates) {
    var += (r - mean) * (r - mean);
  }
  var /= (kFilters - 1);
  const double standard_error = std::sqrt(var / kFilters);
  CHECK(std::abs(mean - model) <= 3.0 * standard_error);
}

#include "sbbf/filter.hpp"

#include <stdexcept>
#include <utility>

#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
#define SBBF_HAVE_AVX2_PATH 1
#include <immintrin.h>
#endif

namespace sbbf {

namespace {

inline std::uint64_t mul_high_u64(std::uint64_t a, std::uint64_t b) noexcept {
#if defined(__SIZEOF_INT128__)
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(a) * static_cast<unsigned __int128>(b)) >> 64);
#else
  // 32-bit limb long multiplication; keeps the exact high half.
  const std::uint64_t a_lo = a & 0xffffffffu;
  const std::uint64_t a_hi = a >> 32;
  const std::uint64_t b_lo = b & 0xffffffffu;
  const std::uint64_t b_hi = b >> 32;
  const std::uint64_t mid1 = a_hi * b_lo + ((a_lo * b_lo) >> 32);
  const std::uint64_t mid2 = a_lo * b_hi + (mid1 & 0xffffffffu);
  return a_hi * b_hi + (mid1 >> 32) + (mid2 >> 32);
#endif
}

inline void add_scalar(Block& block, std::uint64_t hash) noexcept {
  const LaneMask mask = make_mask(hash);
  for (std::size_t i = 0; i < kLanesPerBlock; ++i) {
    block.lanes[i] |= mask.lanes[i];
  }
}

inline bool find_scalar(const Block& block, std::uint64_t hash) noexcept {
  const LaneMask mask = make_mask(hash);
  // All eight mask bits set, i.e. (~block & mask) == 0.
  std::uint32_t missing = 0;
  for (std::size_t i = 0; i < kLanesPerBlock; ++i) {
    missing |= mask.lanes[i] & ~block.lanes[i];
  }
  return missing == 0;
}

#if SBBF_HAVE_AVX2_PATH

__attribute__((target("avx2"))) inline __m256i make_mask_avx2(std::uint64_t hash) noexcept {
  const __m256i ones = _mm256_set1_epi32(1);
  const __m256i seeds =
      _mm256_setr_epi32(static_cast<int>(kLaneSeeds[0]), static_cast<int>(kLaneSeeds[1]),
                        static_cast<int>(kLaneSeeds[2]), static_cast<int>(kLaneSeeds[3]),
                        static_cast<int>(kLaneSeeds[4]), static_cast<int>(kLaneSeeds[5]),
                        static_cast<int>(kLaneSeeds[6]), static_cast<int>(kLaneSeeds[7]));
  // Broadcasting truncates to the low 32 bits of the hash.
  __m256i data = _mm256_set1_epi32(static_cast<int>(static_cast<std::uint32_t>(hash)));
  data = _mm256_mullo_epi32(seeds, data);
  data = _mm256_srli_epi32(data, 32 - 5);
  return _mm256_sllv_epi32(ones, data);
}

__attribute__((target("avx2"))) void add_avx2(Block* blocks, std::uint64_t num_buckets,
                                              std::uint64_t hash) noexcept {
  const __m256i mask = make_mask_avx2(hash);
  __m256i* bucket = reinterpret_cast<__m256i*>(blocks + block_index(hash, num_buckets));
  _mm256_store_si256(bucket, _mm256_or_si256(_mm256_load_si256(bucket), mask));
}

__attribute__((target("avx2"))) bool find_avx2(const Block* blocks, std::uint64_t num_buckets,
                                               std::uint64_t hash) noexcept {
  const __m256i mask = make_mask_avx2(hash);
  const __m256i* bucket =
      reinterpret_cast<const __m256i*>(blocks + block_index(hash, num_buckets));
  return _mm256_testc_si256(_mm256_load_si256(bucket), mask);
}

__attribute__((target("avx2"))) void add_many_avx2(Block* blocks, std::uint64_t num_buckets,
                                                   std::span<const std::uint64_t> hashes) noexcept {
  for (const std::uint64_t hash : hashes) {
    add_avx2(blocks, num_buckets, hash);
  }
}

__attribute__((target("avx2"))) void find_many_avx2(const Block* blocks,
                                                    std::uint64_t num_buckets,
                                                    std::span<const std::uint64_t> hashes,
                                                    std::uint8_t* results) noexcept {
  for (std::size_t i = 0; i < hashes.size(); ++i) {
    results[i] = find_avx2(blocks, num_buckets, hashes[i]) ? 1 : 0;
  }
}

bool cpu_has_avx2() noexcept {
  return __builtin_cpu_supports("avx2") != 0;
}

#endif  // SBBF_HAVE_AVX2_PATH

bool resolve_use_vector(Backend backend) {
#if SBBF_HAVE_AVX2_PATH
  switch (backend) {
    case Backend::kScalar:
      return false;
    case Backend::kVector:
      if (!cpu_has_avx2()) {
        throw std::runtime_error("vector backend requested but AVX2 is not available");
      }
      return true;
    case Backend::kAuto:
      return cpu_has_avx2();
  }
  return false;
#else
  if (backend == Backend::kVector) {
    throw std::runtime_error("vector backend requested but AVX2 is not available");
  }
  return false;
#endif
}

}  // namespace

std::uint64_t block_index(std::uint64_t hash, std::uint64_t num_buckets) noexcept {
  return mul_high_u64(hash, num_buckets);
}

LaneMask make_mask(std::uint64_t hash) noexcept {
  const std::uint32_t low = static_cast<std::uint32_t>(hash);
  LaneMask mask;
  for (std::size_t i = 0; i < kLanesPerBlock; ++i) {
    // Multiply-shift: the top five bits of seed * low32 pick one of 32 bits.
    const std::uint32_t bit = (kLaneSeeds[i] * low) >> (kLaneBits - 5);
    mask.lanes[i] = std::uint32_t{1} << bit;
  }
  return mask;
}

bool vector_backend_available() noexcept {
#if SBBF_HAVE_AVX2_PATH
  return cpu_has_avx2();
#else
  return false;
#endif
}

SplitBlockFilter::SplitBlockFilter(std::uint64_t num_buckets, std::uint32_t hasher_id,
                                   Backend backend)
    : SplitBlockFilter(std::vector<Block>(num_buckets), hasher_id, backend) {}

SplitBlockFilter SplitBlockFilter::from_blocks(std::vector<Block> blocks, std::uint32_t hasher_id,
                                               Backend backend) {
  return SplitBlockFilter(std::move(blocks), hasher_id, backend);
}

SplitBlockFilter::SplitBlockFilter(std::vector<Block> blocks, std::uint32_t hasher_id,
                                   Backend backend)
    : blocks_(std::move(blocks)), hasher_id_(hasher_id), use_vector_(resolve_use_vector(backend)) {
  if (blocks_.empty()) {
    throw std::invalid_argument("SplitBlockFilter needs at least one bucket");
  }
}

void SplitBlockFilter::add_hash(std::uint64_t hash) noexcept {
#if SBBF_HAVE_AVX2_PATH
  if (use_vector_) {
    add_avx2(blocks_.data(), blocks_.size(), hash);
    return;
  }
#endif
  add_scalar(blocks_[block_index(hash, blocks_.size())], hash);
}

bool SplitBlockFilter::find_hash(std::uint64_t hash) const noexcept {
#if SBBF_HAVE_AVX2_PATH
  if (use_vector_) {
    return find_avx2(blocks_.data(), blocks_.size(), hash);
  }
#endif
  return find_scalar(blocks_[block_index(hash, blocks_.size())], hash);
}

void SplitBlockFilter::add_hashes(std::span<const std::uint64_t> hashes) noexcept {
#if SBBF_HAVE_AVX2_PATH
  if (use_vector_) {
    add_many_avx2(blocks_.data(), blocks_.size(), hashes);
    return;
  }
#endif
  for (const std::uint64_t hash : hashes) {
    add_scalar(blocks_[block_index(hash, blocks_.size())], hash);
  }
}

void SplitBlockFilter::find_hashes(std::span<const std::uint64_t> hashes,
                                   std::uint8_t* results) const noexcept {
#if SBBF_HAVE_AVX2_PATH
  if (use_vector_) {
    find_many_avx2(blocks_.data(), blocks_.size(), hashes, results);
    return;
  }
#endif
  for (std::size_t i = 0; i < hashes.size(); ++i) {
    results[i] = find_scalar(blocks_[block_index(hashes[i], blocks_.size())], hashes[i]) ? 1 : 0;
  }
}

std::vector<std::uint8_t> SplitBlockFilter::find_hashes(
    std::span<const std::uint64_t> hashes) const {
  std::vector<std::uint8_t> results(hashes.size());
  find_hashes(hashes, results.data());
  return results;
}

Backend SplitBlockFilter::backend() const noexcept {
  return use_vector_ ? Backend::kVector : Backend::kScalar;
}

}  // namespace sbbf

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sbbf {

inline constexpr std::size_t kLanesPerBlock = 8;
inline constexpr std::size_t kLaneBits = 32;
inline constexpr std::size_t kBlockBits = kLanesPerBlock * kLaneBits;
inline constexpr std::size_t kBlockBytes = kBlockBits / 8;

/// Odd multiply-shift seeds, one per lane, lane 0 first. Frozen forever:
/// every serialized filter depends on these exact constants.
inline constexpr std::array<std::uint32_t, kLanesPerBlock> kLaneSeeds = {
    0x44974d91u, 0x47b6137bu, 0xa2b7289du, 0x8824ad5bu,
    0x2df1424bu, 0x705495c7u, 0x5c6bfb31u, 0x9efc4947u,
};

/// One 256-bit bucket: eight 32-bit lanes. Lane 0 is the lowest-addressed
/// word; the canonical byte image stores each lane little-endian.
struct alignas(kBlockBytes) Block {
  std::array<std::uint32_t, kLanesPerBlock> lanes{};

  friend bool operator==(const Block&, const Block&) = default;
};

static_assert(sizeof(Block) == kBlockBytes);

/// A 256-bit value with exactly one bit set in each 32-bit lane.
struct LaneMask {
  std::array<std::uint32_t, kLanesPerBlock> lanes{};
};

/// Bucket selection: floor(hash * num_buckets / 2^64), computed with a full
/// 128-bit intermediate product. Any num_buckets >= 1 works; no power-of-two
/// restriction. num_buckets == 0 is a precondition violation, rejected at
/// filter construction rather than here.
std::uint64_t block_index(std::uint64_t hash, std::uint64_t num_buckets) noexcept;

/// Lane-mask derivation. Only the low 32 bits of the hash participate:
/// lane i gets bit ((kLaneSeeds[i] * low32(hash)) mod 2^32) >> 27, so each
/// lane ends up with exactly one set bit.
LaneMask make_mask(std::uint64_t hash) noexcept;

enum class Backend : std::uint8_t {
  kAuto,    ///< vector when the CPU supports it, scalar otherwise
  kScalar,  ///< portable path; the semantic reference
  kVector,  ///< AVX2 path; produces bit-identical filters
};

/// True when the vector backend can run on this CPU.
bool vector_backend_available() noexcept;

/// Split block Bloom filter: an array of 256-bit blocks, each insert or
/// lookup touching exactly one block and computing exactly eight lane
/// hashes, independent of filter size and false-positive rate.
///
/// Bits are only ever set, never cleared; there is no delete. Concurrent
/// readers are safe while no writer is active. Writers need external
/// synchronization.
class SplitBlockFilter {
 public:
  /// Builds an all-zero filter. Throws std::invalid_argument when
  /// num_buckets == 0, std::runtime_error when an explicitly requested
  /// vector backend is unavailable.
  explicit SplitBlockFilter(std::uint64_t num_buckets, std::uint32_t hasher_id = 0,
                            Backend backend = Backend::kAuto);

  /// Adopts existing block contents (used by deserialization).
  static SplitBlockFilter from_blocks(std::vector<Block> blocks, std::uint32_t hasher_id = 0,
                                      Backend backend = Backend::kAuto);

  void add_hash(std::uint64_t hash) noexcept;
  bool find_hash(std::uint64_t hash) const noexcept;

  /// Element-wise equivalents of add_hash / find_hash over a batch.
  void add_hashes(std::span<const std::uint64_t> hashes) noexcept;
  void find_hashes(std::span<const std::uint64_t> hashes, std::uint8_t* results) const noexcept;
  std::vector<std::uint8_t> find_hashes(std::span<const std::uint64_t> hashes) const;

  std::uint64_t num_buckets() const noexcept { return blocks_.size(); }
  std::uint64_t size_bytes() const noexcept { return blocks_.size() * kBlockBytes; }
  std::span<const Block> blocks() const noexcept { return blocks_; }

  /// Tag of the key-hashing frontend the filter was built with
  /// (0 = caller supplies raw 64-bit hashes). Recorded in serialized images.
  std::uint32_t hasher_id() const noexcept { return hasher_id_; }
  void set_hasher_id(std::uint32_t id) noexcept { hasher_id_ = id; }

  /// The resolved backend (kScalar or kVector, never kAuto).
  Backend backend() const noexcept;

  /// Equality of contents: same buckets, same bits, same hasher id. The
  /// backend is an execution detail and does not participate.
  friend bool operator==(const SplitBlockFilter& a, const SplitBlockFilter& b) {
    return a.hasher_id_ == b.hasher_id_ && a.blocks_ == b.blocks_;
  }

 private:
  SplitBlockFilter(std::vector<Block> blocks, std::uint32_t hasher_id, Backend backend);

  std::vector<Block> blocks_;
  std::uint32_t hasher_id_ = 0;
  bool use_vector_ = false;
};

}  // namespace sbbf

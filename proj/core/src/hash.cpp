#include "sbbf/hash.hpp"

#include <bit>

namespace sbbf {

namespace {

// XXH64 (https://github.com/Cyan4973/xxHash), reimplemented from the
// published algorithm description. Validated against reference vectors in
// the unit tests.
constexpr std::uint64_t kPrime1 = 0x9E3779B185EBCA87ull;
constexpr std::uint64_t kPrime2 = 0xC2B2AE3D27D4EB4Full;
constexpr std::uint64_t kPrime3 = 0x165667B19E3779F9ull;
constexpr std::uint64_t kPrime4 = 0x85EBCA77C2B2AE63ull;
constexpr std::uint64_t kPrime5 = 0x27D4EB2F165667C5ull;

inline std::uint64_t read_u64(const std::uint8_t* p) noexcept {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) {
    v = (v << 8) | p[i];
  }
  return v;
}

inline std::uint32_t read_u32(const std::uint8_t* p) noexcept {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) {
    v = (v << 8) | p[i];
  }
  return v;
}

inline std::uint64_t round_step(std::uint64_t acc, std::uint64_t lane) noexcept {
  acc += lane * kPrime2;
  acc = std::rotl(acc, 31);
  return acc * kPrime1;
}

inline std::uint64_t merge_round(std::uint64_t acc, std::uint64_t lane_acc) noexcept {
  acc ^= round_step(0, lane_acc);
  return acc * kPrime1 + kPrime4;
}

std::uint64_t xxh64(const std::uint8_t* data, std::size_t len, std::uint64_t seed) noexcept {
  const std::uint8_t* p = data;
  const std::uint8_t* const end = data + len;
  std::uint64_t acc;

  if (len >= 32) {
    std::uint64_t acc1 = seed + kPrime1 + kPrime2;
    std::uint64_t acc2 = seed + kPrime2;
    std::uint64_t acc3 = seed;
    std::uint64_t acc4 = seed - kPrime1;
    const std::uint8_t* const stripe_end = end - 32;
    do {
      acc1 = round_step(acc1, read_u64(p));
      acc2 = round_step(acc2, read_u64(p + 8));
      acc3 = round_step(acc3, read_u64(p + 16));
      acc4 = round_step(acc4, read_u64(p + 24));
      p += 32;
    } while (p <= stripe_end);
    acc = std::rotl(acc1, 1) + std::rotl(acc2, 7) + std::rotl(acc3, 12) + std::rotl(acc4, 18);
    acc = merge_round(acc, acc1);
    acc = merge_round(acc, acc2);
    acc = merge_round(acc, acc3);
    acc = merge_round(acc, acc4);
  } else {
    acc = seed + kPrime5;
  }

  acc += static_cast<std::uint64_t>(len);

  while (p + 8 <= end) {
    acc ^= round_step(0, read_u64(p));
    acc = std::rotl(acc, 27) * kPrime1 + kPrime4;
    p += 8;
  }
  if (p + 4 <= end) {
    acc ^= static_cast<std::uint64_t>(read_u32(p)) * kPrime1;
    acc = std::rotl(acc, 23) * kPrime2 + kPrime3;
    p += 4;
  }
  while (p < end) {
    acc ^= static_cast<std::uint64_t>(*p) * kPrime5;
    acc = std::rotl(acc, 11) * kPrime1;
    ++p;
  }

  acc ^= acc >> 33;
  acc *= kPrime2;
  acc ^= acc >> 29;
  acc *= kPrime3;
  acc ^= acc >> 32;
  return acc;
}

}  // namespace

std::uint64_t hash_key(std::span<const std::uint8_t> key, std::uint64_t seed) noexcept {
  return xxh64(key.data(), key.size(), seed);
}

std::uint64_t hash_key(std::string_view key, std::uint64_t seed) noexcept {
  return xxh64(reinterpret_cast<const std::uint8_t*>(key.data()), key.size(), seed);
}

std::uint64_t hash_u64_key(std::uint64_t key, std::uint64_t seed) noexcept {
  std::uint8_t bytes[8];
  for (int i = 0; i < 8; ++i) {
    bytes[i] = static_cast<std::uint8_t>(key >> (8 * i));
  }
  return xxh64(bytes, sizeof(bytes), seed);
}

}  // namespace sbbf

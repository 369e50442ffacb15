#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace sbbf {

/// Key-hashing frontend ids. Ids are stable across versions; serialized
/// filters record the id they were built with.
inline constexpr std::uint32_t kHasherRaw = 0;    ///< caller supplies 64-bit hashes directly
inline constexpr std::uint32_t kHasherXxh64 = 1;  ///< the bundled byte-string hasher (XXH64)

/// Hashes an arbitrary byte string to 64 bits with XXH64. Deterministic for
/// a given (key, seed) on every platform; empty keys are legal. This is the
/// frontend behind kHasherXxh64 and is frozen for serialization
/// compatibility.
std::uint64_t hash_key(std::span<const std::uint8_t> key, std::uint64_t seed = 0) noexcept;
std::uint64_t hash_key(std::string_view key, std::uint64_t seed = 0) noexcept;

/// Integer keys are hashed via their 8-byte little-endian encoding, keeping
/// one canonical byte-string boundary.
std::uint64_t hash_u64_key(std::uint64_t key, std::uint64_t seed = 0) noexcept;

}  // namespace sbbf

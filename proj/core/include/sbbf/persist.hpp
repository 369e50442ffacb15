#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sbbf/filter.hpp"

namespace sbbf {

/// On-disk filter image, version 1 (normative and frozen):
///
///   offset  size  field
///        0     4  magic "SBBF"
///        4     1  format version (= 1)
///        5     4  hasher id, little-endian
///        9     8  bucket count, little-endian
///       17   32*B  blocks in bucket order; lane 0 first, lanes little-endian
///   17+32*B     4  CRC-32 (IEEE) over everything above, little-endian
inline constexpr std::uint8_t kImageVersion = 1;
inline constexpr std::size_t kImageHeaderBytes = 17;
inline constexpr std::size_t kImageTrailerBytes = 4;

/// Total image size for a given bucket count.
constexpr std::size_t image_size(std::uint64_t num_buckets) {
  return kImageHeaderBytes + static_cast<std::size_t>(num_buckets) * kBlockBytes +
         kImageTrailerBytes;
}

enum class PersistErrc {
  kTruncated,       ///< input shorter or longer than the header declares
  kBadMagic,        ///< not a filter image
  kBadVersion,      ///< a format version this build does not read
  kBadBucketCount,  ///< header declares zero buckets
  kBadChecksum,     ///< CRC mismatch: the image is corrupted
  kIo,              ///< underlying file read/write failed
};

class PersistError : public std::runtime_error {
 public:
  PersistError(PersistErrc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  PersistErrc code() const noexcept { return code_; }

 private:
  PersistErrc code_;
};

/// CRC-32 with the IEEE polynomial (reflected 0xEDB88320), as used by the
/// image trailer. Exposed for tests and interoperability checks.
std::uint32_t crc32_ieee(std::span<const std::uint8_t> data) noexcept;

/// Emits the canonical byte image. Identical filters serialize to identical
/// bytes on every platform.
std::vector<std::uint8_t> serialize(const SplitBlockFilter& filter);

/// Parses and validates an image. Throws PersistError with a distinct code
/// for truncation, bad magic, unsupported version, zero buckets, and CRC
/// mismatch.
SplitBlockFilter deserialize(std::span<const std::uint8_t> bytes);

/// File convenience wrappers; I/O failures surface as PersistErrc::kIo.
void save_filter(const SplitBlockFilter& filter, const std::filesystem::path& path);
SplitBlockFilter load_filter(const std::filesystem::path& path);

}  // namespace sbbf

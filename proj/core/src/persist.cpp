#include "sbbf/persist.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <memory>
#include <utility>

namespace sbbf {

namespace {

constexpr std::array<std::uint8_t, 4> kMagic = {'S', 'B', 'B', 'F'};

constexpr std::array<std::uint32_t, 256> make_crc_table() {
  std::array<std::uint32_t, 256> table{};
  for (std::uint32_t i = 0; i < 256; ++i) {
    std::uint32_t crc = i;
    for (int bit = 0; bit < 8; ++bit) {
      crc = (crc >> 1) ^ ((crc & 1) ? 0xEDB88320u : 0u);
    }
    table[i] = crc;
  }
  return table;
}

constexpr auto kCrcTable = make_crc_table();

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
}

inline void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
}

inline std::uint32_t get_u32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) {
    v = (v << 8) | p[i];
  }
  return v;
}

inline std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) {
    v = (v << 8) | p[i];
  }
  return v;
}

struct FileCloser {
  void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

std::uint32_t crc32_ieee(std::span<const std::uint8_t> data) noexcept {
  std::uint32_t crc = 0xFFFFFFFFu;
  for (const std::uint8_t byte : data) {
    crc = (crc >> 8) ^ kCrcTable[(crc ^ byte) & 0xFFu];
  }
  return crc ^ 0xFFFFFFFFu;
}

std::vector<std::uint8_t> serialize(const SplitBlockFilter& filter) {
  std::vector<std::uint8_t> out;
  out.reserve(image_size(filter.num_buckets()));
  for (const std::uint8_t byte : kMagic) {
    out.push_back(byte);
  }
  out.push_back(kImageVersion);
  put_u32(out, filter.hasher_id());
  put_u64(out, filter.num_buckets());
  for (const Block& block : filter.blocks()) {
    for (const std::uint32_t lane : block.lanes) {
      put_u32(out, lane);
    }
  }
  put_u32(out, crc32_ieee(out));
  return out;
}

SplitBlockFilter deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kImageHeaderBytes + kImageTrailerBytes) {
    throw PersistError(PersistErrc::kTruncated, "filter image shorter than fixed fields");
  }
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw PersistError(PersistErrc::kBadMagic, "not a filter image (bad magic)");
  }
  const std::uint8_t version = bytes[4];
  if (version != kImageVersion) {
    throw PersistError(PersistErrc::kBadVersion,
                       "unsupported filter image version " + std::to_string(version));
  }
  const std::uint32_t hasher_id = get_u32(bytes.data() + 5);
  const std::uint64_t num_buckets = get_u64(bytes.data() + 9);
  if (num_buckets == 0) {
    throw PersistError(PersistErrc::kBadBucketCount, "filter image declares zero buckets");
  }
  if (bytes.size() != image_size(num_buckets)) {
    throw PersistError(PersistErrc::kTruncated,
                       "filter image length does not match its bucket count");
  }
  const std::size_t payload_end = bytes.size() - kImageTrailerBytes;
  const std::uint32_t expected_crc = get_u32(bytes.data() + payload_end);
  const std::uint32_t actual_crc = crc32_ieee(bytes.first(payload_end));
  if (expected_crc != actual_crc) {
    throw PersistError(PersistErrc::kBadChecksum, "filter image checksum mismatch");
  }
  std::vector<Block> blocks(num_buckets);
  const std::uint8_t* p = bytes.data() + kImageHeaderBytes;
  for (Block& block : blocks) {
    for (std::uint32_t& lane : block.lanes) {
      lane = get_u32(p);
      p += 4;
    }
  }
  return SplitBlockFilter::from_blocks(std::move(blocks), hasher_id);
}

void save_filter(const SplitBlockFilter& filter, const std::filesystem::path& path) {
  const std::vector<std::uint8_t> image = serialize(filter);
  FilePtr file(std::fopen(path.string().c_str(), "wb"));
  if (!file) {
    throw PersistError(PersistErrc::kIo, "cannot open " + path.string() + " for writing");
  }
  if (std::fwrite(image.data(), 1, image.size(), file.get()) != image.size()) {
    throw PersistError(PersistErrc::kIo, "short write to " + path.string());
  }
  if (std::fflush(file.get()) != 0) {
    throw PersistError(PersistErrc::kIo, "flush failed for " + path.string());
  }
}

SplitBlockFilter load_filter(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.string().c_str(), "rb"));
  if (!file) {
    throw PersistError(PersistErrc::kIo, "cannot open " + path.string());
  }
  std::vector<std::uint8_t> bytes;
  std::array<std::uint8_t, 1 << 16> chunk;
  std::size_t got = 0;
  while ((got = std::fread(chunk.data(), 1, chunk.size(), file.get())) > 0) {
    bytes.insert(bytes.end(), chunk.begin(), chunk.begin() + got);
  }
  if (std::ferror(file.get())) {
    throw PersistError(PersistErrc::kIo, "read failed for " + path.string());
  }
  return deserialize(bytes);
}

}  // namespace sbbf

#pragma once

#include <map>
#include <string>
#include <vector>

namespace mgmap::ad {

// MGT1 tensor container. Layout:
//   magic "MGT1"
//   u32 entry count
//   per entry, in lexicographic name order:
//     u32 name length, UTF-8 name bytes
//     u8 rank
//     u32 extents (little-endian)
//     f32 row-major payload (little-endian)
struct CheckpointEntry {
  std::vector<int> shape;
  std::vector<float> data;
};

using CheckpointMap = std::map<std::string, CheckpointEntry>;

void write_mgt1(const std::string& path, const CheckpointMap& entries);
CheckpointMap read_mgt1(const std::string& path);

// Helpers for stashing small strings/hashes as tensors: each byte (or 16-bit
// chunk) is stored as an exactly-representable f32.
CheckpointEntry encode_text(const std::string& text);
std::string decode_text(const CheckpointEntry& e);
CheckpointEntry encode_hash(uint64_t h);
uint64_t decode_hash(const CheckpointEntry& e);

}  // namespace mgmap::ad

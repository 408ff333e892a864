#include "mgmap/ad/checkpoint.hpp"

#include <fstream>

#include "mgmap/core/binio.hpp"
#include "mgmap/core/errors.hpp"

namespace mgmap::ad {

void write_mgt1(const std::string& path, const CheckpointMap& entries) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open checkpoint for writing: " + path);
  out.write("MGT1", 4);
  write_u32(out, static_cast<uint32_t>(entries.size()));
  for (const auto& [name, e] : entries) {  // std::map iterates lexicographically
    write_u32(out, static_cast<uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u8(out, static_cast<uint8_t>(e.shape.size()));
    long n = 1;
    for (int ext : e.shape) {
      write_u32(out, static_cast<uint32_t>(ext));
      n *= ext;
    }
    if (n != static_cast<long>(e.data.size()))
      throw DataError("checkpoint entry " + name + ": payload does not match extents");
    for (float v : e.data) write_f32(out, v);
  }
  if (!out) throw DataError("write failed: " + path);
}

CheckpointMap read_mgt1(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  char magic[4];
  if (!in.read(magic, 4) || std::string(magic, 4) != "MGT1")
    throw DataError("not an MGT1 checkpoint: " + path);
  uint32_t count = read_u32(in, "entry count");
  CheckpointMap entries;
  std::string prev;
  for (uint32_t k = 0; k < count; ++k) {
    uint32_t len = read_u32(in, "name length");
    if (len > 4096) throw DataError("checkpoint entry name too long");
    std::string name(len, '\0');
    if (!in.read(name.data(), len)) throw DataError("truncated file while reading entry name");
    if (k > 0 && !(prev < name))
      throw DataError("checkpoint entries out of lexicographic order at " + name);
    prev = name;
    CheckpointEntry e;
    uint8_t rank = read_u8(in, "rank");
    long n = 1;
    for (int d = 0; d < rank; ++d) {
      uint32_t ext = read_u32(in, "extent");
      e.shape.push_back(static_cast<int>(ext));
      n *= ext;
    }
    if (n < 0 || n > (1L << 30)) throw DataError("checkpoint entry too large: " + name);
    e.data.resize(n);
    for (long i = 0; i < n; ++i) e.data[i] = read_f32(in, "payload");
    entries.emplace(name, std::move(e));
  }
  return entries;
}

CheckpointEntry encode_text(const std::string& text) {
  CheckpointEntry e;
  e.shape = {static_cast<int>(text.size())};
  e.data.reserve(text.size());
  for (unsigned char c : text) e.data.push_back(static_cast<float>(c));
  return e;
}

std::string decode_text(const CheckpointEntry& e) {
  std::string out;
  out.reserve(e.data.size());
  for (float v : e.data) {
    int c = static_cast<int>(v);
    if (c < 0 || c > 255) throw DataError("invalid text payload in checkpoint");
    out.push_back(static_cast<char>(c));
  }
  return out;
}

CheckpointEntry encode_hash(uint64_t h) {
  CheckpointEntry e;
  e.shape = {4};
  for (int i = 0; i < 4; ++i) e.data.push_back(static_cast<float>((h >> (16 * i)) & 0xffff));
  return e;
}

uint64_t decode_hash(const CheckpointEntry& e) {
  if (e.data.size() != 4) throw DataError("invalid hash payload in checkpoint");
  uint64_t h = 0;
  for (int i = 0; i < 4; ++i) h |= static_cast<uint64_t>(e.data[i]) << (16 * i);
  return h;
}

}  // namespace mgmap::ad

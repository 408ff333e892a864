#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "mgmap/core/errors.hpp"

namespace mgmap {

// Little-endian binary helpers for the MGT1/MGG1 formats. Byte order is
// written out explicitly so the files are portable regardless of host.

inline void write_u32(std::ostream& out, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

inline void write_u8(std::ostream& out, uint8_t v) {
  out.write(reinterpret_cast<const char*>(&v), 1);
}

inline void write_f32(std::ostream& out, float v) {
  uint32_t bits;
  std::memcpy(&bits, &v, 4);
  write_u32(out, bits);
}

inline uint32_t read_u32(std::istream& in, const char* what) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4))
    throw DataError(std::string("truncated file while reading ") + what);
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

inline uint8_t read_u8(std::istream& in, const char* what) {
  char c;
  if (!in.read(&c, 1)) throw DataError(std::string("truncated file while reading ") + what);
  return static_cast<uint8_t>(c);
}

inline float read_f32(std::istream& in, const char* what) {
  uint32_t bits = read_u32(in, what);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

}  // namespace mgmap

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace mgmap {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// Independent deterministic stream derived from a base seed and a tag.
// Used so that e.g. scene geometry and observation noise never share draws.
inline uint64_t derive_seed(uint64_t base, std::string_view tag) {
  return splitmix64(base ^ fnv1a64(tag));
}

inline uint64_t derive_seed(uint64_t base, std::string_view tag, uint64_t index) {
  return splitmix64(splitmix64(base ^ fnv1a64(tag)) + index);
}

using Rng = std::mt19937_64;

inline Rng make_rng(uint64_t seed) { return Rng(seed); }

}  // namespace mgmap

#pragma once

#include <cstdint>

#include "mgmap/world/episode.hpp"
#include "mgmap/world/scene.hpp"
#include "mgmap/world/vocab.hpp"

namespace mgmap::world {

struct WorldGenParams {
  double bounds_min = 10.0;
  double bounds_max = 13.0;
  int objects = 12;
  int dividers = 3;
  double ambiguity_fraction = 0.33;
  double clearance = 0.10;
  int num_categories = 8;
  int max_attempts = 40;
};

// Deterministic in (seed, params). Guarantees:
//  - at least ceil(ambiguity_fraction * objects) objects have a same-category
//    partner within 4 m differing only in their attribute vector;
//  - no other same-category pair sits within 4 m (so fraction 0 means none);
//  - the main free component is large enough for episode sampling.
Scene generate_scene(uint64_t seed, const WorldGenParams& params);

struct EpisodeGenParams {
  double min_len = 4.0;
  double max_len = 9.0;
  double landmark_radius = 1.5;
  int min_landmarks = 2;
  int max_landmarks = 4;
  int max_attempts = 400;
};

Episode sample_episode(const Scene& scene, uint64_t seed, const EpisodeGenParams& params,
                       const Vocab& vocab, int index = 0);

std::vector<Episode> sample_episodes(const Scene& scene, uint64_t seed,
                                     const EpisodeGenParams& params, const Vocab& vocab,
                                     int count);

// Shortcut smoothing keeps only line-of-sight-connected vertices; exposed for
// tests. A segment is clear when every 2 cm sample lies in a free grid cell.
bool line_clear(const Scene& scene, const Vec2& a, const Vec2& b);

}  // namespace mgmap::world

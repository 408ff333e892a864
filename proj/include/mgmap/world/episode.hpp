#pragma once

#include <string>
#include <vector>

#include "mgmap/core/geometry.hpp"

namespace mgmap::world {

struct Pose {
  double x = 0, y = 0;
  double theta = 0;  // rad, CCW from +x, normalized to (-pi, pi]
  Vec2 position() const { return {x, y}; }
};

struct Episode {
  std::string episode_id;
  std::string scene_id;
  Pose start;
  Vec2 goal;
  Polyline path;  // start position ... goal
  std::vector<int> instruction_tokens;
  std::string instruction_text;
};

// JSON-lines dataset I/O; parse errors carry the 1-based line number.
void write_episodes(const std::string& path, const std::vector<Episode>& episodes);
std::vector<Episode> read_episodes(const std::string& path);

std::string episode_to_json_line(const Episode& e);
Episode episode_from_json_line(const std::string& line, int lineno);

}  // namespace mgmap::world

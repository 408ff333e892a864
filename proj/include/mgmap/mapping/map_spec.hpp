#pragma once

#include <cmath>

#include "mgmap/core/geometry.hpp"

namespace mgmap::mapping {

// Egocentric map geometry: agent at cell (m/2, m/2), heading "up" (toward
// row 0). Agent-frame axes: x forward, y left. Cell (r,c) center sits at
// x = (m/2 - r) * cell, y = (m/2 - c) * cell; binning rounds to the nearest
// cell center so the agent cell corresponds to the agent position exactly.
struct MapSpec {
  int m = 100;
  double cell = 0.12;
  int c_f = 8;  // fine-grained (attribute) channels
  int c_s = 8;  // semantic categories K
  int c = 32;   // fused channels

  long cells() const { return static_cast<long>(m) * m; }

  Vec2 cell_center_agent(int r, int col) const {
    return {(m / 2 - r) * cell, (m / 2 - col) * cell};
  }

  // Returns false when the point falls outside the map.
  bool cell_of_agent(const Vec2& p_agent, int& r, int& col) const {
    long rr = std::llround(m / 2 - p_agent.x / cell);
    long cc = std::llround(m / 2 - p_agent.y / cell);
    r = static_cast<int>(rr);
    col = static_cast<int>(cc);
    return rr >= 0 && rr < m && cc >= 0 && cc < m;
  }

  // Agent frame <-> world frame at the given pose.
  static Vec2 world_to_agent(const Vec2& p, const Vec2& pos, double theta) {
    Vec2 rel = p - pos;
    double c = std::cos(theta), s = std::sin(theta);
    return {c * rel.x + s * rel.y, -s * rel.x + c * rel.y};
  }
  static Vec2 agent_to_world(const Vec2& p_agent, const Vec2& pos, double theta) {
    double c = std::cos(theta), s = std::sin(theta);
    return {pos.x + c * p_agent.x - s * p_agent.y, pos.y + s * p_agent.x + c * p_agent.y};
  }
};

}  // namespace mgmap::mapping

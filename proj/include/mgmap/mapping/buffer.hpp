#pragma once

#include <vector>

#include "mgmap/mapping/map_spec.hpp"
#include "mgmap/sim/simulator.hpp"
#include "mgmap/world/scene.hpp"

namespace mgmap::mapping {

// World-frame accumulation buffer. The egocentric maps are re-rendered from
// it at every pose, so rotation round-trips are exact and coverage grows
// monotonically. Feature aggregation is element-wise max.
struct AllocentricBuffer {
  double x0 = 0, y0 = 0, cell = 0.12;
  int nx = 0, ny = 0;
  int c_f = 8;
  std::vector<float> feat;      // (ny*nx) x c_f, zero until first hit
  std::vector<int> hit_count;   // feature updates per cell
  std::vector<int> gt_cat;      // -1 unknown; hits set object/wall, rays mark free
  std::vector<uint8_t> seen;    // free-marked or hit
  long dropped_hits = 0;        // hits outside the buffer (clipped)
  long written = 0;             // total feature updates

  long index(int ix, int iy) const { return static_cast<long>(iy) * nx + ix; }
  bool in_range(int ix, int iy) const { return ix >= 0 && ix < nx && iy >= 0 && iy < ny; }
  int cell_x(double x) const { return static_cast<int>(std::floor((x - x0) / cell)); }
  int cell_y(double y) const { return static_cast<int>(std::floor((y - y0) / cell)); }
  long observed_cells() const {
    long n = 0;
    for (uint8_t s : seen) n += s;
    return n;
  }
};

AllocentricBuffer make_buffer(const world::Scene& scene, const MapSpec& spec);

// Bins each hit ray into the buffer (max-aggregate features, latest-hit GT
// category) and marks the traversed cells as observed free space.
void project_observation(AllocentricBuffer& buffer, const world::Pose& pose,
                         const sim::Observation& obs);

// Egocentric crops rendered by nearest-neighbor lookup into the buffer.
struct EgoMaps {
  int m = 0;
  int c_f = 0;
  std::vector<float> feat;       // c_f x m x m, CHW
  std::vector<int> gt_cat;       // m*m, -1 unknown
  std::vector<uint8_t> observed; // m*m
};

EgoMaps render_egocentric(const AllocentricBuffer& buffer, const world::Pose& pose,
                          const MapSpec& spec);

}  // namespace mgmap::mapping

#pragma once

#include <limits>
#include <list>
#include <map>
#include <memory>
#include <vector>

#include "mgmap/core/geometry.hpp"
#include "mgmap/world/scene.hpp"

namespace mgmap::world {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Geodesic distance field over the free-space grid, 8-connected Dijkstra
// with sqrt(2)-weighted diagonals. Unreachable or blocked cells hold +inf.
struct GeodesicField {
  const OccupancyGrid* grid = nullptr;
  long source = -1;
  std::vector<double> dist;

  double at_cell(int ix, int iy) const {
    if (!grid->in_range(ix, iy)) return kInf;
    return dist[grid->index(ix, iy)];
  }
  double at(const Vec2& p) const { return at_cell(grid->cell_x(p.x), grid->cell_y(p.y)); }
};

// source must be in free space.
GeodesicField geodesic_field(const Scene& scene, const Vec2& source);

// Shortest grid path source -> target as cell centers (greedy descent on the
// target's field). Empty if unreachable.
std::vector<Vec2> grid_shortest_path(const Scene& scene, const GeodesicField& target_field,
                                     const Vec2& source);

// Center of the closest main-component cell to p (ring search). Used to snap
// predicted waypoints that land inside obstacles or off the grid.
Vec2 nearest_free_point(const Scene& scene, const Vec2& p);

// Per-scene cache keyed by source cell; NOT thread-safe (one per worker).
class FieldCache {
 public:
  explicit FieldCache(const Scene& scene, size_t capacity = 64)
      : scene_(&scene), capacity_(capacity) {}

  const GeodesicField& at(const Vec2& source);

  const Scene& scene() const { return *scene_; }

 private:
  const Scene* scene_;
  size_t capacity_;
  std::list<long> order_;
  std::map<long, std::pair<std::list<long>::iterator, std::shared_ptr<GeodesicField>>> cache_;
};

}  // namespace mgmap::world

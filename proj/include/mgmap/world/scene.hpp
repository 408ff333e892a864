#pragma once

#include <string>
#include <vector>

#include "mgmap/core/geometry.hpp"

namespace mgmap::world {

// Semantic category conventions: id 0 is reserved for walls, id 1 for
// observed free space; scene objects use ids >= 2. The default K = 8 keeps
// six object categories; the full 27-name preset is available for larger K.
constexpr int kWallCategory = 0;
constexpr int kFreeCategory = 1;
constexpr int kFirstObjectCategory = 2;

// Occupancy grid resolution (m). Fixed by the geodesic-field contract.
constexpr double kGridCell = 0.06;

const std::vector<std::string>& default_category_names();   // K = 8
const std::vector<std::string>& mp3d_category_names();      // the 27-name preset

struct Footprint {
  enum class Kind { Disc, Rect };
  Kind kind = Kind::Disc;
  double radius = 0.3;   // disc
  double hw = 0.3, hh = 0.3;  // rect half extents

  // Signed-ish distance from p to the footprint boundary (<= 0 inside).
  double distance(const Vec2& p, const Vec2& center) const {
    if (kind == Kind::Disc) return (p - center).norm() - radius;
    double dx = std::abs(p.x - center.x) - hw;
    double dy = std::abs(p.y - center.y) - hh;
    if (dx <= 0 && dy <= 0) return std::max(dx, dy);
    dx = std::max(dx, 0.0);
    dy = std::max(dy, 0.0);
    return std::sqrt(dx * dx + dy * dy);
  }

  bool contains(const Vec2& p, const Vec2& center) const { return distance(p, center) <= 0.0; }
};

struct SceneObject {
  Vec2 center;
  Footprint footprint;
  int category_id = kFirstObjectCategory;
  std::vector<float> attributes;
};

struct Bounds {
  double xmin = 0, ymin = 0, xmax = 0, ymax = 0;
  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  bool contains(const Vec2& p) const {
    return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
  }
};

// Free-space occupancy at kGridCell resolution, inflated by `clearance`.
struct OccupancyGrid {
  double x0 = 0, y0 = 0;
  int nx = 0, ny = 0;
  std::vector<uint8_t> blocked;     // 1 = inside inflated obstacle
  std::vector<uint8_t> component;   // 1 = member of the main free component

  long index(int ix, int iy) const { return static_cast<long>(iy) * nx + ix; }
  bool in_range(int ix, int iy) const { return ix >= 0 && ix < nx && iy >= 0 && iy < ny; }
  int cell_x(double x) const { return static_cast<int>(std::floor((x - x0) / kGridCell)); }
  int cell_y(double y) const { return static_cast<int>(std::floor((y - y0) / kGridCell)); }
  Vec2 center(int ix, int iy) const {
    return {x0 + (ix + 0.5) * kGridCell, y0 + (iy + 0.5) * kGridCell};
  }
  bool is_free(const Vec2& p) const {
    int ix = cell_x(p.x), iy = cell_y(p.y);
    return in_range(ix, iy) && !blocked[index(ix, iy)];
  }
  bool in_main_component(const Vec2& p) const {
    int ix = cell_x(p.x), iy = cell_y(p.y);
    return in_range(ix, iy) && component[index(ix, iy)];
  }
};

struct Scene {
  std::string id;
  Bounds bounds;
  std::vector<Segment> walls;        // includes the four boundary segments
  std::vector<SceneObject> objects;
  OccupancyGrid grid;                // derived, rebuilt on load

  int num_categories = 8;  // K
  double clearance = 0.10;

  // Exact-geometry queries (not grid-based).
  bool inside_obstacle(const Vec2& p) const {
    for (const auto& o : objects)
      if (o.footprint.contains(p, o.center)) return true;
    return false;
  }
};

// Rebuilds the occupancy grid and main free component from walls/objects.
void build_occupancy(Scene& scene);

std::string scene_to_json(const Scene& scene);
Scene scene_from_json(const std::string& text);
void write_scene(const std::string& path, const Scene& scene);
Scene read_scene(const std::string& path);

}  // namespace mgmap::world

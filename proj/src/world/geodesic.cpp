#include "mgmap/world/geodesic.hpp"

#include <queue>

#include "mgmap/core/errors.hpp"

namespace mgmap::world {

GeodesicField geodesic_field(const Scene& scene, const Vec2& source) {
  const OccupancyGrid& g = scene.grid;
  int sx = g.cell_x(source.x), sy = g.cell_y(source.y);
  if (!g.in_range(sx, sy) || g.blocked[g.index(sx, sy)])
    throw DomainError("geodesic_field: source inside obstacle or out of bounds");

  GeodesicField f;
  f.grid = &g;
  f.source = g.index(sx, sy);
  f.dist.assign(g.blocked.size(), kInf);

  using Item = std::pair<double, long>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  f.dist[f.source] = 0.0;
  pq.push({0.0, f.source});
  const double diag = kGridCell * std::sqrt(2.0);
  while (!pq.empty()) {
    auto [d, i] = pq.top();
    pq.pop();
    if (d > f.dist[i]) continue;
    int ix = static_cast<int>(i % g.nx), iy = static_cast<int>(i / g.nx);
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        int nx2 = ix + dx, ny2 = iy + dy;
        if (!g.in_range(nx2, ny2)) continue;
        long ni = g.index(nx2, ny2);
        if (g.blocked[ni]) continue;
        double nd = d + ((dx != 0 && dy != 0) ? diag : kGridCell);
        if (nd < f.dist[ni]) {
          f.dist[ni] = nd;
          pq.push({nd, ni});
        }
      }
  }
  return f;
}

std::vector<Vec2> grid_shortest_path(const Scene& scene, const GeodesicField& target_field,
                                     const Vec2& source) {
  const OccupancyGrid& g = scene.grid;
  int cx = g.cell_x(source.x), cy = g.cell_y(source.y);
  if (!g.in_range(cx, cy)) return {};
  if (!std::isfinite(target_field.at_cell(cx, cy))) return {};

  std::vector<Vec2> path;
  path.push_back(g.center(cx, cy));
  const double diag = kGridCell * std::sqrt(2.0);
  long guard = static_cast<long>(g.nx) * g.ny + 8;
  while (target_field.at_cell(cx, cy) > 0.0 && guard-- > 0) {
    double best = kInf;
    int bx = cx, by = cy;
    double here = target_field.at_cell(cx, cy);
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        int nx2 = cx + dx, ny2 = cy + dy;
        double step = (dx != 0 && dy != 0) ? diag : kGridCell;
        double cand = target_field.at_cell(nx2, ny2);
        if (!std::isfinite(cand)) continue;
        // Descend: total = remaining + step taken, prefer strict progress.
        double score = cand + step;
        if (cand < here && score < best) {
          best = score;
          bx = nx2;
          by = ny2;
        }
      }
    if (bx == cx && by == cy) break;  // local minimum (should not happen on exact fields)
    cx = bx;
    cy = by;
    path.push_back(g.center(cx, cy));
  }
  return path;
}

Vec2 nearest_free_point(const Scene& scene, const Vec2& p) {
  const OccupancyGrid& g = scene.grid;
  int px = std::clamp(g.cell_x(p.x), 0, g.nx - 1);
  int py = std::clamp(g.cell_y(p.y), 0, g.ny - 1);
  if (g.component[g.index(px, py)]) return g.center(px, py);
  int max_r = std::max(g.nx, g.ny);
  for (int r = 1; r <= max_r; ++r) {
    double best = kInf;
    Vec2 best_pt;
    for (int iy = py - r; iy <= py + r; ++iy) {
      for (int ix = px - r; ix <= px + r; ++ix) {
        if (std::max(std::abs(ix - px), std::abs(iy - py)) != r) continue;
        if (!g.in_range(ix, iy) || !g.component[g.index(ix, iy)]) continue;
        Vec2 c = g.center(ix, iy);
        double d = (c - p).norm();
        if (d < best) {
          best = d;
          best_pt = c;
        }
      }
    }
    if (std::isfinite(best)) return best_pt;
  }
  throw DomainError("nearest_free_point: scene has no free space");
}

const GeodesicField& FieldCache::at(const Vec2& source) {
  const OccupancyGrid& g = scene_->grid;
  int ix = g.cell_x(source.x), iy = g.cell_y(source.y);
  if (!g.in_range(ix, iy))
    throw DomainError("FieldCache: source out of bounds");
  long key = g.index(ix, iy);
  auto it = cache_.find(key);
  if (it != cache_.end()) {
    order_.erase(it->second.first);
    order_.push_front(key);
    it->second.first = order_.begin();
    return *it->second.second;
  }
  auto field = std::make_shared<GeodesicField>(geodesic_field(*scene_, g.center(ix, iy)));
  order_.push_front(key);
  cache_[key] = {order_.begin(), field};
  if (cache_.size() > capacity_) {
    long victim = order_.back();
    order_.pop_back();
    cache_.erase(victim);
  }
  return *cache_[key].second;
}

}  // namespace mgmap::world

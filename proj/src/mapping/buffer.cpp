#include "mgmap/mapping/buffer.hpp"

#include "mgmap/world/vocab.hpp"

namespace mgmap::mapping {

AllocentricBuffer make_buffer(const world::Scene& scene, const MapSpec& spec) {
  AllocentricBuffer b;
  b.cell = spec.cell;
  b.c_f = spec.c_f;
  const double margin = 0.5;
  b.x0 = scene.bounds.xmin - margin;
  b.y0 = scene.bounds.ymin - margin;
  b.nx = static_cast<int>(std::ceil((scene.bounds.width() + 2 * margin) / b.cell));
  b.ny = static_cast<int>(std::ceil((scene.bounds.height() + 2 * margin) / b.cell));
  long n = static_cast<long>(b.nx) * b.ny;
  b.feat.assign(n * b.c_f, 0.0f);
  b.hit_count.assign(n, 0);
  b.gt_cat.assign(n, -1);
  b.seen.assign(n, 0);
  return b;
}

namespace {

// Marks cells on the grid segment (x0,y0)->(x1,y1), excluding the endpoint.
void mark_free_line(AllocentricBuffer& b, int x0, int y0, int x1, int y1) {
  int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
  int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  int x = x0, y = y0;
  while (!(x == x1 && y == y1)) {
    if (b.in_range(x, y)) {
      long i = b.index(x, y);
      b.seen[i] = 1;
      if (b.gt_cat[i] < 0) b.gt_cat[i] = world::kFreeCategory;
    }
    int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y += sy;
    }
  }
}

}  // namespace

void project_observation(AllocentricBuffer& b, const world::Pose& pose,
                         const sim::Observation& obs) {
  int ax = b.cell_x(pose.x), ay = b.cell_y(pose.y);
  for (int i = 0; i < obs.n_rays; ++i) {
    double ang = pose.theta + obs.angles[i];
    Vec2 dir{std::cos(ang), std::sin(ang)};
    Vec2 end = pose.position() + dir * static_cast<double>(obs.depth[i]);
    int ex = b.cell_x(end.x), ey = b.cell_y(end.y);

    // Cells the ray passed through are observed free regardless of the hit.
    int fx = b.in_range(ex, ey) ? ex : std::clamp(ex, 0, b.nx - 1);
    int fy = b.in_range(ex, ey) ? ey : std::clamp(ey, 0, b.ny - 1);
    if (b.in_range(ax, ay)) mark_free_line(b, ax, ay, fx, fy);

    if (!obs.hit[i]) continue;  // max-range clamp: nothing to write
    if (!b.in_range(ex, ey)) {
      ++b.dropped_hits;
      continue;
    }
    long cell = b.index(ex, ey);
    float* f = b.feat.data() + cell * b.c_f;
    const float* src = obs.feat.data() + static_cast<long>(i) * obs.feat_dim;
    if (b.hit_count[cell] == 0) {
      for (int k = 0; k < b.c_f; ++k) f[k] = src[k];
    } else {
      for (int k = 0; k < b.c_f; ++k) f[k] = std::max(f[k], src[k]);
    }
    ++b.hit_count[cell];
    ++b.written;
    b.seen[cell] = 1;
    b.gt_cat[cell] = obs.cat_gt[i];
  }
}

EgoMaps render_egocentric(const AllocentricBuffer& b, const world::Pose& pose,
                          const MapSpec& spec) {
  EgoMaps out;
  out.m = spec.m;
  out.c_f = spec.c_f;
  const long mm = spec.cells();
  out.feat.assign(static_cast<long>(spec.c_f) * mm, 0.0f);
  out.gt_cat.assign(mm, -1);
  out.observed.assign(mm, 0);

  const double ct = std::cos(pose.theta), st = std::sin(pose.theta);
  for (int r = 0; r < spec.m; ++r) {
    for (int c = 0; c < spec.m; ++c) {
      Vec2 pa = spec.cell_center_agent(r, c);
      double wx = pose.x + ct * pa.x - st * pa.y;
      double wy = pose.y + st * pa.x + ct * pa.y;
      int bx = b.cell_x(wx), by = b.cell_y(wy);
      if (!b.in_range(bx, by)) continue;
      long src = b.index(bx, by);
      long dst = static_cast<long>(r) * spec.m + c;
      if (b.hit_count[src] > 0) {
        const float* f = b.feat.data() + src * b.c_f;
        for (int k = 0; k < b.c_f; ++k) out.feat[static_cast<long>(k) * mm + dst] = f[k];
      }
      out.gt_cat[dst] = b.gt_cat[src];
      out.observed[dst] = b.seen[src];
    }
  }
  return out;
}

}  // namespace mgmap::mapping

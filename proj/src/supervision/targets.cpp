#include "mgmap/supervision/targets.hpp"

#include "mgmap/core/errors.hpp"
#include "mgmap/mapping/map_spec.hpp"

namespace mgmap::sup {

namespace {

// First outward crossing of |a + t(b-a) - c| = r for a starting inside.
bool segment_circle_exit(const Vec2& a, const Vec2& b, const Vec2& c, double r, Vec2& out) {
  Vec2 d = b - a;
  Vec2 m = a - c;
  double dd = d.norm2();
  if (dd == 0) return false;
  double bq = d.dot(m);
  double cq = m.norm2() - r * r;
  double disc = bq * bq - dd * cq;
  if (disc < 0) return false;
  double t = (-bq + std::sqrt(disc)) / dd;
  if (t < 0 || t > 1) return false;
  out = a + d * t;
  return true;
}

}  // namespace

Vec2 waypoint_world(const world::Scene& scene, world::FieldCache& fields, const Polyline& path,
                    const Vec2& pos, double radius) {
  if (path.pts.empty()) throw DomainError("waypoint_world: empty path");
  if (path.pts.size() == 1) return path.pts[0];

  double arc_q = path.nearest_arc(pos);
  Vec2 q = path.at_arc(arc_q);

  if ((q - pos).norm() >= radius - 1e-9) {
    // Off-path: head back toward q along the grid geodesic, capped at radius.
    const auto& field = fields.at(q);
    auto gp = world::grid_shortest_path(scene, field, pos);
    if (gp.size() < 2) return q;
    double acc = 0;
    for (size_t i = 1; i < gp.size(); ++i) {
      double seg = (gp[i] - gp[i - 1]).norm();
      if (acc + seg >= radius) {
        double t = (radius - acc) / seg;
        return gp[i - 1] + (gp[i] - gp[i - 1]) * t;
      }
      acc += seg;
    }
    return q;
  }

  // Remaining curve from q toward the goal.
  std::vector<Vec2> rem;
  rem.push_back(q);
  double acc = 0;
  for (size_t i = 1; i < path.pts.size(); ++i) {
    double seg = (path.pts[i] - path.pts[i - 1]).norm();
    if (acc + seg > arc_q + 1e-12) rem.push_back(path.pts[i]);
    acc += seg;
  }
  for (size_t i = 1; i < rem.size(); ++i) {
    if ((rem[i] - pos).norm() > radius) {
      Vec2 exit;
      if (segment_circle_exit(rem[i - 1], rem[i], pos, radius, exit)) return exit;
      return rem[i - 1];  // started outside within tolerance
    }
  }
  return path.pts.back();  // whole remainder inside the disc
}

WaypointTarget waypoint_gt(const world::Scene& scene, world::FieldCache& fields,
                           const Polyline& path, const world::Pose& pose, double radius) {
  Vec2 w = waypoint_world(scene, fields, path, pose.position(), radius);
  Vec2 a = mapping::MapSpec::world_to_agent(w, pose.position(), pose.theta);
  return {a.x, a.y};
}

ProgressTarget progress_gt(const Vec2& pos, const world::GeodesicField& goal_field,
                           double start_to_goal) {
  if (!(std::isfinite(start_to_goal)) || start_to_goal <= 0)
    throw DomainError("progress_gt: start-goal geodesic must be finite and positive");
  double g = goal_field.at(pos);
  if (!std::isfinite(g)) return {0.0, false};
  double p = 1.0 - g / start_to_goal;
  return {std::clamp(p, 0.0, 1.0), true};
}

}  // namespace mgmap::sup

#pragma once

#include "mgmap/core/geometry.hpp"
#include "mgmap/world/episode.hpp"
#include "mgmap/world/geodesic.hpp"

namespace mgmap::sup {

// World-frame ground-truth waypoint: walk the path forward from the point
// nearest the agent; the waypoint is the first exit of the traversed curve
// from the disc of `radius` around the agent, the goal when the remainder
// stays inside, or (when the agent strayed beyond `radius` from the path)
// the point `radius` along the grid shortest path back to it.
Vec2 waypoint_world(const world::Scene& scene, world::FieldCache& fields,
                    const Polyline& path, const Vec2& pos, double radius);

struct WaypointTarget {
  double dx = 0, dy = 0;  // agent frame, meters
};

WaypointTarget waypoint_gt(const world::Scene& scene, world::FieldCache& fields,
                           const Polyline& path, const world::Pose& pose, double radius = 3.0);

struct ProgressTarget {
  double p = 0;
  bool valid = true;  // false when the agent sits in a region the goal field cannot reach
};

// Completeness: 1 - g(pose,goal)/g(start,goal), clamped to [0,1].
ProgressTarget progress_gt(const Vec2& pos, const world::GeodesicField& goal_field,
                           double start_to_goal);

}  // namespace mgmap::sup

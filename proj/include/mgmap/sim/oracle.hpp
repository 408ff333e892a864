#pragma once

#include "mgmap/sim/simulator.hpp"
#include "mgmap/world/geodesic.hpp"

namespace mgmap::sim {

// Teacher / sanity-check controller: aims for the forward waypoint on the
// episode path (3 m carrot), picking the low-level action whose lookahead
// position minimizes geodesic distance to it, FORWARD preferred on ties.
// Stops within `stop_radius` (geodesic) of the goal.
class Oracle {
 public:
  Oracle(const Scene& scene, world::FieldCache& fields, const SimParams& params,
         double stop_radius = 0.25, double carrot_radius = 3.0)
      : scene_(&scene),
        fields_(&fields),
        params_(params),
        stop_radius_(stop_radius),
        carrot_radius_(carrot_radius) {}

  Action act(const Pose& pose, const world::Episode& episode);

 private:
  const Scene* scene_;
  world::FieldCache* fields_;
  SimParams params_;
  double stop_radius_;
  double carrot_radius_;
};

}  // namespace mgmap::sim

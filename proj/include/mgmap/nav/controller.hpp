#pragma once

#include "mgmap/sim/simulator.hpp"
#include "mgmap/world/geodesic.hpp"

namespace mgmap::nav {

// Frozen point-goal controller standing in for a learned local policy: STOP
// when the predicted progress clears lambda_p, otherwise descend the geodesic
// field toward the stored waypoint, turning first whenever the heading error
// exceeds one turn quantum.
sim::Action waypoint_controller_action(const world::Scene& scene, world::FieldCache& fields,
                                       const world::Pose& pose, const Vec2& waypoint_world,
                                       double p_hat, double lambda_p, double turn_deg);

// Tracks the controller-side bookkeeping across an episode; the recurrent
// hidden-state tensors are owned by the rollout loop.
struct AgentState {
  Vec2 waypoint_world;
  bool has_waypoint = false;
  int steps_since_replan = 0;  // 0 means "evaluate heads this step"
  double last_p_hat = 0.0;
  int head_evals = 0;
};

}  // namespace mgmap::nav

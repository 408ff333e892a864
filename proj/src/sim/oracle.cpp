#include "mgmap/sim/oracle.hpp"

#include "mgmap/core/errors.hpp"
#include "mgmap/supervision/targets.hpp"

namespace mgmap::sim {

Action Oracle::act(const Pose& pose, const world::Episode& episode) {
  const auto& goal_field = fields_->at(episode.goal);
  double g_goal = goal_field.at(pose.position());
  if (!std::isfinite(g_goal))
    throw PlanningError("oracle: goal unreachable from the current pose");
  if (g_goal <= stop_radius_) return Action::Stop;

  Vec2 carrot = sup::waypoint_world(*scene_, *fields_, episode.path, pose.position(),
                                    carrot_radius_);
  if (!scene_->grid.in_main_component(carrot))
    carrot = world::nearest_free_point(*scene_, carrot);
  const auto& field = fields_->at(carrot);

  const double quantum = deg2rad(params_.turn_deg);
  auto lookahead = [&](double heading) {
    MoveResult res = forward_motion(*scene_, pose.position(), heading, params_.forward_step);
    return field.at(res.pos);
  };
  double d_f = lookahead(pose.theta);
  double d_l = lookahead(pose.theta + quantum);
  double d_r = lookahead(pose.theta - quantum);

  double best = std::min({d_f, d_l, d_r});
  if (d_f <= best + 1e-9) return Action::Forward;
  if (d_l <= best + 1e-9) return Action::TurnLeft;
  return Action::TurnRight;
}

}  // namespace mgmap::sim

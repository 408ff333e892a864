#include "mgmap/nav/controller.hpp"

namespace mgmap::nav {

sim::Action waypoint_controller_action(const world::Scene& scene, world::FieldCache& fields,
                                       const world::Pose& pose, const Vec2& waypoint_world,
                                       double p_hat, double lambda_p, double turn_deg) {
  if (p_hat > lambda_p) return sim::Action::Stop;

  Vec2 target = waypoint_world;
  if (!scene.grid.in_main_component(target)) target = world::nearest_free_point(scene, target);

  Vec2 pos = pose.position();
  if ((target - pos).norm() < world::kGridCell) return sim::Action::Forward;

  // Desired direction: a short way down the geodesic path to the target,
  // falling back to the straight-line bearing.
  Vec2 dir = (target - pos).normalized();
  const auto& field = fields.at(target);
  auto gp = world::grid_shortest_path(scene, field, pos);
  if (gp.size() >= 2) {
    for (size_t i = 1; i < gp.size(); ++i) {
      if ((gp[i] - pos).norm() >= 0.15 || i + 1 == gp.size()) {
        Vec2 d = gp[i] - pos;
        if (d.norm() > 1e-9) dir = d.normalized();
        break;
      }
    }
  }

  double desired = std::atan2(dir.y, dir.x);
  double err = normalize_angle(desired - pose.theta);
  double quantum = deg2rad(turn_deg);
  if (std::abs(err) > quantum + 1e-9)
    return err > 0 ? sim::Action::TurnLeft : sim::Action::TurnRight;
  return sim::Action::Forward;
}

}  // namespace mgmap::nav

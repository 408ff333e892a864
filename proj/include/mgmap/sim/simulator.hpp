#pragma once

#include <cstdint>
#include <vector>

#include "mgmap/core/geometry.hpp"
#include "mgmap/core/rng.hpp"
#include "mgmap/world/episode.hpp"
#include "mgmap/world/scene.hpp"

namespace mgmap::sim {

using world::Pose;
using world::Scene;

enum class Action { Forward = 0, TurnLeft = 1, TurnRight = 2, Stop = 3 };

const char* action_name(Action a);

struct SimParams {
  int n_rays = 64;
  double fov_deg = 90.0;
  double max_range = 5.0;
  double noise_sigma = 0.02;
  double forward_step = 0.25;
  double turn_deg = 15.0;
  int step_budget = 500;
};

struct Observation {
  std::vector<float> feat;     // n_rays x F, row-major; hit attributes + noise
  std::vector<float> depth;    // n_rays, clamped to max_range
  std::vector<int> cat_gt;     // n_rays; wall category for walls/void
  std::vector<uint8_t> hit;    // 1 when depth < max_range (projectable)
  std::vector<double> angles;  // ray angles relative to heading, left of center positive last
  int n_rays = 0;
  int feat_dim = 0;
};

struct RayHit {
  double t = 0;
  bool hit = false;
  int object_index = -1;  // -1 = wall
  Vec2 tangent;           // surface tangent at the hit, unit length
};

RayHit cast_ray(const Scene& scene, const Vec2& origin, const Vec2& dir);

struct MoveResult {
  Vec2 pos;
  double moved = 0;
  bool collided = false;
};

// Forward translation with truncation at first contact plus one sliding pass
// along the contact tangent.
MoveResult forward_motion(const Scene& scene, const Vec2& pos, double heading, double step);

// Heading is tracked as (base angle, turn index modulo one revolution) so an
// integral number of full turns restores the start heading bit-exactly.
class Simulator {
 public:
  Simulator(const Scene& scene, const SimParams& params);

  void reset(const Pose& start);

  const Pose& pose() const { return pose_; }
  int steps() const { return steps_; }
  int collisions() const { return collisions_; }
  bool done() const { return done_; }
  bool stop_called() const { return stop_called_; }
  double traveled() const { return traveled_; }
  const Scene& scene() const { return *scene_; }
  const SimParams& params() const { return params_; }

  void step(Action a);

  Observation observe(Rng& noise_rng) const;

 private:
  const Scene* scene_;
  SimParams params_;
  Pose pose_;
  double theta_base_ = 0;
  int turn_index_ = 0;
  int turns_per_rev_ = 24;
  int steps_ = 0;
  int collisions_ = 0;
  double traveled_ = 0;
  bool done_ = false;
  bool stop_called_ = false;

  void refresh_heading();
};

}  // namespace mgmap::sim

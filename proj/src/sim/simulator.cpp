#include "mgmap/sim/simulator.hpp"

#include "mgmap/core/errors.hpp"
#include "mgmap/world/geodesic.hpp"
#include "mgmap/world/vocab.hpp"

namespace mgmap::sim {

namespace {
constexpr double kContactEps = 1e-3;  // stand-off from surfaces after contact
}

const char* action_name(Action a) {
  switch (a) {
    case Action::Forward: return "FORWARD";
    case Action::TurnLeft: return "TURN_LEFT";
    case Action::TurnRight: return "TURN_RIGHT";
    case Action::Stop: return "STOP";
  }
  return "?";
}

RayHit cast_ray(const Scene& scene, const Vec2& origin, const Vec2& dir) {
  RayHit best;
  best.t = world::kInf;
  auto consider = [&](double t, int obj, const Vec2& tangent) {
    if (t >= 0 && t < best.t) {
      best.t = t;
      best.hit = true;
      best.object_index = obj;
      best.tangent = tangent;
    }
  };
  for (const auto& w : scene.walls) {
    if (auto t = ray_segment(origin, dir, w)) consider(*t, -1, (w.b - w.a).normalized());
  }
  for (size_t i = 0; i < scene.objects.size(); ++i) {
    const auto& o = scene.objects[i];
    if (o.footprint.kind == world::Footprint::Kind::Disc) {
      if (auto t = ray_circle(origin, dir, o.center, o.footprint.radius)) {
        Vec2 hitp = origin + dir * *t;
        Vec2 radial = (hitp - o.center).normalized();
        consider(*t, static_cast<int>(i), Vec2{-radial.y, radial.x});
      }
    } else {
      double hw = o.footprint.hw, hh = o.footprint.hh;
      Vec2 c = o.center;
      Segment sides[4] = {{{c.x - hw, c.y - hh}, {c.x + hw, c.y - hh}},
                          {{c.x + hw, c.y - hh}, {c.x + hw, c.y + hh}},
                          {{c.x + hw, c.y + hh}, {c.x - hw, c.y + hh}},
                          {{c.x - hw, c.y + hh}, {c.x - hw, c.y - hh}}};
      for (const auto& s : sides) {
        if (auto t = ray_segment(origin, dir, s))
          consider(*t, static_cast<int>(i), (s.b - s.a).normalized());
      }
    }
  }
  if (!std::isfinite(best.t)) best = RayHit{};
  return best;
}

MoveResult forward_motion(const Scene& scene, const Vec2& pos, double heading, double step) {
  Vec2 dir{std::cos(heading), std::sin(heading)};
  MoveResult res;
  res.pos = pos;

  RayHit hit = cast_ray(scene, pos, dir);
  if (!hit.hit || hit.t > step + kContactEps) {
    res.pos = pos + dir * step;
    res.moved = step;
    return res;
  }

  res.collided = true;
  double travel = std::max(0.0, hit.t - kContactEps);
  res.pos = pos + dir * travel;
  res.moved = travel;

  // Slide the remaining distance along the contact tangent.
  double remaining = step - travel;
  double along = dir.dot(hit.tangent);
  if (std::abs(along) > 1e-6 && remaining > kContactEps) {
    Vec2 tdir = hit.tangent * (along > 0 ? 1.0 : -1.0);
    double tlen = remaining * std::abs(along);
    RayHit slide_hit = cast_ray(scene, res.pos, tdir);
    double slide = tlen;
    if (slide_hit.hit && slide_hit.t - kContactEps < slide)
      slide = std::max(0.0, slide_hit.t - kContactEps);
    res.pos = res.pos + tdir * slide;
    res.moved += slide;
  }
  return res;
}

Simulator::Simulator(const Scene& scene, const SimParams& params)
    : scene_(&scene), params_(params) {
  double rev = 360.0 / params_.turn_deg;
  turns_per_rev_ = static_cast<int>(std::llround(rev));
  if (std::abs(rev - turns_per_rev_) > 1e-9)
    throw DomainError("turn_deg must divide 360 evenly");
}

void Simulator::reset(const Pose& start) {
  pose_ = start;
  pose_.theta = normalize_angle(start.theta);
  theta_base_ = pose_.theta;
  turn_index_ = 0;
  steps_ = 0;
  collisions_ = 0;
  traveled_ = 0;
  done_ = false;
  stop_called_ = false;
  if (!scene_->grid.is_free(pose_.position()) || scene_->inside_obstacle(pose_.position()))
    throw DomainError("simulator reset: start pose not in free space");
}

void Simulator::refresh_heading() {
  pose_.theta = normalize_angle(theta_base_ + turn_index_ * (2.0 * kPi / turns_per_rev_));
}

void Simulator::step(Action a) {
  if (done_) throw UsageError("simulator: step after episode end");
  switch (a) {
    case Action::Forward: {
      MoveResult res = forward_motion(*scene_, pose_.position(), pose_.theta,
                                      params_.forward_step);
      if (res.collided) ++collisions_;
      traveled_ += res.moved;
      pose_.x = res.pos.x;
      pose_.y = res.pos.y;
      break;
    }
    case Action::TurnLeft:
      turn_index_ = (turn_index_ + 1) % turns_per_rev_;
      refresh_heading();
      break;
    case Action::TurnRight:
      turn_index_ = (turn_index_ - 1 + turns_per_rev_) % turns_per_rev_;
      refresh_heading();
      break;
    case Action::Stop:
      stop_called_ = true;
      done_ = true;
      break;
  }
  ++steps_;
  if (steps_ >= params_.step_budget) done_ = true;
}

Observation Simulator::observe(Rng& noise_rng) const {
  Observation obs;
  obs.n_rays = params_.n_rays;
  obs.feat_dim = world::kAttrDim;
  obs.feat.resize(static_cast<size_t>(obs.n_rays) * obs.feat_dim);
  obs.depth.resize(obs.n_rays);
  obs.cat_gt.resize(obs.n_rays);
  obs.hit.resize(obs.n_rays);
  obs.angles.resize(obs.n_rays);

  const double fov = deg2rad(params_.fov_deg);
  std::normal_distribution<double> noise(0.0, params_.noise_sigma);
  static const std::vector<float> wall_feat = world::wall_attributes();

  for (int i = 0; i < obs.n_rays; ++i) {
    double rel = obs.n_rays == 1 ? 0.0 : -fov / 2 + fov * i / (obs.n_rays - 1);
    obs.angles[i] = rel;
    double ang = pose_.theta + rel;
    Vec2 dir{std::cos(ang), std::sin(ang)};
    RayHit hit = cast_ray(*scene_, pose_.position(), dir);

    const std::vector<float>* attrs = &wall_feat;
    int cat = world::kWallCategory;
    double depth = params_.max_range;
    bool is_hit = false;
    if (hit.hit && hit.t < params_.max_range) {
      depth = hit.t;
      is_hit = true;
      if (hit.object_index >= 0) {
        attrs = &scene_->objects[hit.object_index].attributes;
        cat = scene_->objects[hit.object_index].category_id;
      }
    }
    obs.depth[i] = static_cast<float>(depth);
    obs.cat_gt[i] = cat;
    obs.hit[i] = is_hit ? 1 : 0;
    for (int f = 0; f < obs.feat_dim; ++f)
      obs.feat[static_cast<size_t>(i) * obs.feat_dim + f] =
          (*attrs)[f] + static_cast<float>(noise(noise_rng));
  }
  return obs;
}

}  // namespace mgmap::sim

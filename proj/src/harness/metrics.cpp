#include "mgmap/harness/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "mgmap/core/errors.hpp"

namespace mgmap::harness {

double spl_formula(bool success, double d, double d_bar) {
  if (!success) return 0.0;
  return d / std::max(d, d_bar);
}

EpisodeResult evaluate_episode(const std::string& episode_id,
                               const std::vector<world::Pose>& visited, double traveled,
                               bool stop_called, int steps, int collisions,
                               const world::GeodesicField& goal_field, double start_goal_dist,
                               double success_radius) {
  if (visited.empty()) throw DomainError("evaluate_episode: empty trace");
  EpisodeResult r;
  r.episode_id = episode_id;
  r.tl = traveled;
  r.steps = steps;
  r.collisions = collisions;
  double final_g = goal_field.at(visited.back().position());
  r.ne = std::isfinite(final_g) ? final_g : start_goal_dist;
  double min_g = world::kInf;
  for (const auto& p : visited) min_g = std::min(min_g, goal_field.at(p.position()));
  r.oracle_success = min_g <= success_radius;
  r.success = stop_called && final_g <= success_radius;
  r.spl = spl_formula(r.success, start_goal_dist, traveled);
  return r;
}

std::vector<uint8_t> top_mass_mask(const std::vector<double>& p, double frac) {
  long n = static_cast<long>(p.size());
  long k = std::max(1L, static_cast<long>(std::floor(frac * n)));
  std::vector<long> idx(n);
  std::iota(idx.begin(), idx.end(), 0L);
  std::sort(idx.begin(), idx.end(), [&](long a, long b) {
    if (p[a] != p[b]) return p[a] > p[b];
    return a < b;  // raster-order tie break
  });
  std::vector<uint8_t> mask(n, 0);
  for (long i = 0; i < k; ++i) mask[idx[i]] = 1;
  return mask;
}

double localization_iou(const std::vector<double>& p, const std::vector<double>& p_hat,
                        double frac) {
  if (p.size() != p_hat.size()) throw ShapeError("localization_iou: size mismatch");
  auto ma = top_mass_mask(p, frac);
  auto mb = top_mass_mask(p_hat, frac);
  long inter = 0, uni = 0;
  for (size_t i = 0; i < ma.size(); ++i) {
    inter += (ma[i] && mb[i]) ? 1 : 0;
    uni += (ma[i] || mb[i]) ? 1 : 0;
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

bool waypoint_in_path_area(const mapping::MapSpec& spec, double dx, double dy,
                           const std::vector<double>& p_gt, double frac) {
  int r, c;
  if (!spec.cell_of_agent({dx, dy}, r, c)) return false;
  auto mask = top_mass_mask(p_gt, frac);
  return mask[static_cast<long>(r) * spec.m + c] != 0;
}

}  // namespace mgmap::harness

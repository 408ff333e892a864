#pragma once

#include <vector>

#include "mgmap/mapping/map_spec.hpp"
#include "mgmap/world/episode.hpp"
#include "mgmap/world/geodesic.hpp"

namespace mgmap::harness {

// SPL = s * d / max(d, d_bar): d shortest geodesic start->goal, d_bar traveled.
double spl_formula(bool success, double d, double d_bar);

struct EpisodeResult {
  std::string episode_id;
  bool success = false;
  bool oracle_success = false;
  double tl = 0;   // executed translation (m)
  double ne = 0;   // geodesic final -> goal (m)
  double spl = 0;
  int steps = 0;
  int collisions = 0;
  double mean_iou = 0;   // mean over head evaluations; valid when iou_samples > 0
  int iou_samples = 0;
  int wp_hits = 0;       // predicted waypoints inside the GT top-mass mask
  int wp_samples = 0;
};

// Metrics from a finished trace. `visited` must include the start pose and
// the pose after every action.
EpisodeResult evaluate_episode(const std::string& episode_id,
                               const std::vector<world::Pose>& visited, double traveled,
                               bool stop_called, int steps, int collisions,
                               const world::GeodesicField& goal_field, double start_goal_dist,
                               double success_radius);

// Top-`frac`-by-probability masks (ties broken by raster order) intersected
// over united. Symmetric; 1 when the distributions agree.
double localization_iou(const std::vector<double>& p, const std::vector<double>& p_hat,
                        double frac = 0.10);

// Index set of the top-`frac` cells of a distribution.
std::vector<uint8_t> top_mass_mask(const std::vector<double>& p, double frac);

// Whether an agent-frame waypoint lands in the GT top-mass mask; off-map
// waypoints miss.
bool waypoint_in_path_area(const mapping::MapSpec& spec, double dx, double dy,
                           const std::vector<double>& p_gt, double frac = 0.10);

}  // namespace mgmap::harness

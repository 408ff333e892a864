#pragma once

#include <string>
#include <vector>

#include "mgmap/core/geometry.hpp"
#include "mgmap/mapping/map_spec.hpp"
#include "mgmap/world/episode.hpp"

namespace mgmap::sup {

enum class GtMode { Soft, Hard };

GtMode gt_mode_from_string(const std::string& s);

// Coarse localization ground truth over the egocentric grid. P' holds the
// normalized distances (max 1 at the path, 0 at the farthest cell); P is the
// softmax over all cells (soft) or uniform over the sub-threshold band
// (hard). Degenerate distance ranges collapse to a uniform P.
struct CoarseGtGrid {
  int m = 0;
  GtMode mode = GtMode::Soft;
  std::vector<double> p;       // m*m, sums to 1
  std::vector<double> pprime;  // m*m, in [0,1]
  std::vector<double> dist;    // m*m, cell-to-path distances (retained for tests)
};

CoarseGtGrid coarse_localization_gt(const Polyline& path_world, const world::Pose& pose,
                                    const mapping::MapSpec& spec, GtMode mode,
                                    double hard_threshold = 0.72);

}  // namespace mgmap::sup

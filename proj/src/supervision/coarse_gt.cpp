#include "mgmap/supervision/coarse_gt.hpp"

#include <algorithm>

#include "mgmap/core/errors.hpp"

namespace mgmap::sup {

GtMode gt_mode_from_string(const std::string& s) {
  if (s == "soft") return GtMode::Soft;
  if (s == "hard") return GtMode::Hard;
  throw DataError("unknown supervision.gt_mode: " + s);
}

CoarseGtGrid coarse_localization_gt(const Polyline& path_world, const world::Pose& pose,
                                    const mapping::MapSpec& spec, GtMode mode,
                                    double hard_threshold) {
  if (path_world.pts.empty()) throw DomainError("coarse_localization_gt: empty path");
  const int m = spec.m;
  const long n = spec.cells();

  Polyline path_agent;
  path_agent.pts.reserve(path_world.pts.size());
  for (const auto& p : path_world.pts)
    path_agent.pts.push_back(
        mapping::MapSpec::world_to_agent(p, pose.position(), pose.theta));

  CoarseGtGrid out;
  out.m = m;
  out.mode = mode;
  out.dist.resize(n);
  out.pprime.assign(n, 0.0);
  out.p.assign(n, 0.0);

  double dmin = std::numeric_limits<double>::infinity();
  double dmax = -std::numeric_limits<double>::infinity();
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < m; ++c) {
      double d = path_agent.distance(spec.cell_center_agent(r, c));
      out.dist[static_cast<long>(r) * m + c] = d;
      dmin = std::min(dmin, d);
      dmax = std::max(dmax, d);
    }
  }

  const bool degenerate = !(dmax > dmin);
  if (!degenerate)
    for (long i = 0; i < n; ++i) out.pprime[i] = (dmax - out.dist[i]) / (dmax - dmin);

  if (mode == GtMode::Soft) {
    // Softmax across all grid entries, accumulated in double.
    double mx = degenerate ? 0.0 : 1.0;
    double denom = 0;
    for (long i = 0; i < n; ++i) denom += std::exp(out.pprime[i] - mx);
    for (long i = 0; i < n; ++i) out.p[i] = std::exp(out.pprime[i] - mx) / denom;
  } else {
    long count = 0;
    for (long i = 0; i < n; ++i)
      if (out.dist[i] < hard_threshold) ++count;
    if (count == 0) {
      // No cell under the threshold (agent far from the path): fall back to
      // the argmin band so P stays a distribution.
      for (long i = 0; i < n; ++i)
        if (out.dist[i] <= dmin + 1e-12) ++count;
      for (long i = 0; i < n; ++i)
        if (out.dist[i] <= dmin + 1e-12) out.p[i] = 1.0 / count;
    } else {
      for (long i = 0; i < n; ++i)
        if (out.dist[i] < hard_threshold) out.p[i] = 1.0 / count;
    }
  }
  return out;
}

}  // namespace mgmap::sup

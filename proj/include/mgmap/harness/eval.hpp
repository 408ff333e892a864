#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mgmap/core/config.hpp"
#include "mgmap/harness/metrics.hpp"
#include "mgmap/nav/policy.hpp"
#include "mgmap/world/episode.hpp"

namespace mgmap::harness {

enum class EvalActor { Checkpoint, Oracle, Zero };

EvalActor eval_actor_from_string(const std::string& s);

struct EvalReport {
  std::vector<EpisodeResult> episodes;
  double sr = 0, os = 0, spl = 0, tl = 0, ne = 0;
  double mean_iou = 0;       // over episodes with samples
  double wp_hit_rate = 0;    // pooled over waypoint samples
  int episodes_with_iou = 0;
  long wp_samples = 0;

  std::string to_json(const Config& cfg, uint64_t seed) const;
  std::string episodes_jsonl() const;
};

// Rolls the chosen actor over every episode (deterministic in seed and input
// order), collecting navigation metrics plus per-head-eval localization IoU
// and waypoint-hit samples for model actors. dump_dir gets one P/P-hat MGG1
// pair per episode; trace_dir gets per-step JSONL trajectory traces.
EvalReport run_eval(const Config& cfg, const std::map<std::string, world::Scene>& scenes,
                    const std::vector<world::Episode>& episodes, EvalActor actor,
                    const nav::ModelF* model, uint64_t seed, const std::string& dump_dir = "",
                    const std::string& trace_dir = "");

}  // namespace mgmap::harness

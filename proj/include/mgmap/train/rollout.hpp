#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mgmap/nav/controller.hpp"
#include "mgmap/nav/policy.hpp"
#include "mgmap/sim/oracle.hpp"
#include "mgmap/world/episode.hpp"
#include "mgmap/world/geodesic.hpp"

namespace mgmap::train {

// Compact replayable rollout: scene/episode reference plus the executed
// action sequence and the per-step oracle labels. Observations are
// reconstructed at replay time from the stored noise seed.
struct RolloutRecord {
  std::string episode_id;
  uint64_t noise_seed = 0;
  std::vector<sim::Action> actions;         // executed
  std::vector<sim::Action> oracle_actions;  // labels: always the oracle's
  std::vector<uint8_t> used_oracle;         // 1 when the executed action was the oracle's
};

struct CollectStats {
  long steps = 0;
  long oracle_steps = 0;
  long head_evals = 0;
};

struct RolloutSettings {
  sim::SimParams sim;
  mapping::MapSpec spec;
  double lambda_p = 0.8;
  int replan_every = 3;
};

// Mixing: each step executes the oracle action with probability oracle_prob,
// otherwise the policy's. `model` may be null when oracle_prob == 1 (teacher
// forcing), which skips all network work.
RolloutRecord collect_rollout(const world::Scene& scene, const world::Episode& episode,
                              const nav::ModelF* model, world::FieldCache& fields,
                              const RolloutSettings& settings, double oracle_prob,
                              uint64_t noise_seed, uint64_t mix_seed, CollectStats* stats);

}  // namespace mgmap::train

#pragma once

#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "mgmap/ad/adam.hpp"
#include "mgmap/core/config.hpp"
#include "mgmap/train/rollout.hpp"

namespace mgmap::train {

// Teacher-forcing + DAgger training over a fixed episode set. Batch is one
// episode, unrolled with a truncated backprop window over head evaluations;
// single-worker execution is bit-deterministic in (seed, config).
class Trainer {
 public:
  Trainer(const Config& cfg, std::map<std::string, world::Scene> scenes,
          std::vector<world::Episode> episodes, std::ostream* metrics_log = nullptr);

  nav::ModelF& model() { return *model_; }
  const Config& config() const { return cfg_; }

  // Collects one pure-oracle rollout per episode, then trains for
  // train.teacher_epochs epochs on them.
  void teacher_phase();

  // Iteration n collects train.trajectories_per_iter rollouts mixing oracle
  // actions with probability 0.5^n, then trains on the union of all shards.
  void dagger_phase(int iterations);

  // Exposed for the schedule test: collect `count` rollouts at the given
  // oracle probability into a throwaway shard.
  CollectStats collect_probe(double oracle_prob, int count);

  void save(const std::string& path) const;

  long adam_steps() const { return adam_->step_count(); }
  // DAgger replay buffer: the union of all dagger-collected shards.
  const std::vector<RolloutRecord>& dagger_records() const { return dagger_records_; }
  const std::vector<RolloutRecord>& teacher_records() const { return teacher_records_; }

 private:
  Config cfg_;
  std::map<std::string, world::Scene> scenes_;
  std::vector<world::Episode> episodes_;
  std::map<std::string, const world::Episode*> episodes_by_id_;
  std::map<std::string, std::unique_ptr<world::FieldCache>> fields_;
  std::unique_ptr<nav::ModelF> model_;
  std::unique_ptr<ad::Adam<float>> adam_;
  std::ostream* metrics_log_;
  RolloutSettings settings_;
  std::vector<RolloutRecord> teacher_records_;
  std::vector<RolloutRecord> dagger_records_;
  uint64_t seed_ = 1;
  long rollout_counter_ = 0;
  long global_eval_step_ = 0;
  int current_iter_ = 0;

  world::FieldCache& fields_for(const std::string& scene_id);
  const world::Scene& scene_for(const world::Episode& e);

  void collect_into(std::vector<RolloutRecord>& dst, double oracle_prob, int count,
                    CollectStats* stats);
  void train_epochs(const std::vector<RolloutRecord>& records, int epochs);
  double replay_and_train(const RolloutRecord& rec, int epoch);
};

RolloutSettings settings_from_config(const Config& cfg);

}  // namespace mgmap::train

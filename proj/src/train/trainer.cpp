#include "mgmap/train/trainer.hpp"

#include <cmath>

#include <json.hpp>

#include "mgmap/mapping/buffer.hpp"
#include "mgmap/supervision/losses.hpp"
#include "mgmap/world/vocab.hpp"

namespace mgmap::train {

RolloutSettings settings_from_config(const Config& cfg) {
  RolloutSettings s;
  s.sim.n_rays = cfg.geti("sim.n_rays");
  s.sim.fov_deg = cfg.getf("sim.fov_deg");
  s.sim.max_range = cfg.getf("sim.max_range");
  s.sim.noise_sigma = cfg.getf("sim.noise_sigma");
  s.sim.forward_step = cfg.getf("sim.forward_step");
  s.sim.turn_deg = cfg.getf("sim.turn_deg");
  s.sim.step_budget = cfg.geti("sim.step_budget");
  s.spec.m = cfg.geti("map.m");
  s.spec.cell = cfg.getf("map.cell");
  s.spec.c_f = cfg.geti("model.attributes");
  s.spec.c_s = cfg.geti("model.categories");
  s.spec.c = cfg.geti("model.c");
  s.lambda_p = cfg.getf("train.lambda_p");
  s.replan_every = cfg.geti("train.replan_every");
  return s;
}

Trainer::Trainer(const Config& cfg, std::map<std::string, world::Scene> scenes,
                 std::vector<world::Episode> episodes, std::ostream* metrics_log)
    : cfg_(cfg),
      scenes_(std::move(scenes)),
      episodes_(std::move(episodes)),
      metrics_log_(metrics_log),
      settings_(settings_from_config(cfg)),
      seed_(static_cast<uint64_t>(cfg.getl("run.seed"))) {
  if (episodes_.empty()) throw UsageError("trainer: empty episode set");
  for (const auto& e : episodes_) {
    if (!scenes_.count(e.scene_id))
      throw DataError("trainer: episode references missing scene " + e.scene_id);
    episodes_by_id_[e.episode_id] = &e;
  }
  world::Vocab vocab;
  model_ = std::make_unique<nav::ModelF>(nav::ModelConfig::from_config(cfg_, vocab.size()),
                                         seed_);
  adam_ = std::make_unique<ad::Adam<float>>(static_cast<float>(cfg_.getf("train.lr")));
}

world::FieldCache& Trainer::fields_for(const std::string& scene_id) {
  auto it = fields_.find(scene_id);
  if (it == fields_.end())
    it = fields_.emplace(scene_id,
                         std::make_unique<world::FieldCache>(scenes_.at(scene_id), 192))
             .first;
  return *it->second;
}

const world::Scene& Trainer::scene_for(const world::Episode& e) {
  return scenes_.at(e.scene_id);
}

void Trainer::collect_into(std::vector<RolloutRecord>& dst, double oracle_prob, int count,
                           CollectStats* stats) {
  for (int i = 0; i < count; ++i) {
    const world::Episode& ep = episodes_[rollout_counter_ % episodes_.size()];
    uint64_t noise_seed = derive_seed(seed_, "rollout-noise", rollout_counter_);
    uint64_t mix_seed = derive_seed(seed_, "rollout-mix", rollout_counter_);
    ++rollout_counter_;
    dst.push_back(collect_rollout(scene_for(ep), ep,
                                  oracle_prob >= 1.0 ? nullptr : model_.get(),
                                  fields_for(ep.scene_id), settings_, oracle_prob, noise_seed,
                                  mix_seed, stats));
  }
}

CollectStats Trainer::collect_probe(double oracle_prob, int count) {
  CollectStats stats;
  std::vector<RolloutRecord> scratch;
  collect_into(scratch, oracle_prob, count, &stats);
  return stats;
}

void Trainer::teacher_phase() {
  current_iter_ = 0;
  collect_into(teacher_records_, 1.0, static_cast<int>(episodes_.size()), nullptr);
  train_epochs(teacher_records_, cfg_.geti("train.teacher_epochs"));
}

void Trainer::dagger_phase(int iterations) {
  int per_iter = cfg_.geti("train.trajectories_per_iter");
  for (int n = 1; n <= iterations; ++n) {
    current_iter_ = n;
    collect_into(dagger_records_, std::pow(0.5, n), per_iter, nullptr);
    train_epochs(dagger_records_, cfg_.geti("train.epochs_per_iter"));
  }
}

void Trainer::train_epochs(const std::vector<RolloutRecord>& records, int epochs) {
  for (int ep = 0; ep < epochs; ++ep)
    for (const auto& rec : records) replay_and_train(rec, ep);
}

double Trainer::replay_and_train(const RolloutRecord& rec, int epoch) {
  const world::Episode& episode = *episodes_by_id_.at(rec.episode_id);
  const world::Scene& scene = scene_for(episode);
  world::FieldCache& fields = fields_for(episode.scene_id);

  const auto& goal_field = fields.at(episode.goal);
  double start_goal = goal_field.at(episode.start.position());

  sim::Simulator simu(scene, settings_.sim);
  simu.reset(episode.start);
  mapping::AllocentricBuffer buffer = mapping::make_buffer(scene, settings_.spec);
  Rng noise_rng(make_rng(rec.noise_seed));

  const double alpha = cfg_.getf("train.alpha");
  const double beta = cfg_.getf("train.beta");
  const double gamma = cfg_.getf("train.gamma");
  const double grad_clip = cfg_.getf("train.grad_clip");
  const int window = cfg_.geti("train.bptt_window");
  const double wp_radius = cfg_.getf("supervision.waypoint_radius");
  const sup::GtMode gt_mode = sup::gt_mode_from_string(cfg_.gets("supervision.gt_mode"));
  const double hard_thr = cfg_.getf("supervision.hard_threshold");

  auto h = ad::Tensor::zeros({model_->cfg.gru_hidden});
  auto h2 = ad::Tensor::zeros({model_->cfg.gru2_hidden});
  auto instruction = model_->encode_instruction(episode.instruction_tokens);

  std::vector<ad::Tensor> window_losses;
  double episode_loss = 0;
  long evals = 0;
  double last_valid_p = 0.0;
  int steps_since_replan = 0;

  auto flush_window = [&]() {
    if (window_losses.empty()) return;
    ad::Tensor total = window_losses[0];
    for (size_t i = 1; i < window_losses.size(); ++i) total = ad::add(total, window_losses[i]);
    total = ad::scale(total, 1.0f / static_cast<float>(window_losses.size()));
    if (!std::isfinite(static_cast<double>(total.item())))
      throw NumericError("training: non-finite window loss at episode " + rec.episode_id +
                         " epoch " + std::to_string(epoch));
    total.backward();
    ad::Adam<float>::clip_grad_norm(model_->params, grad_clip);
    adam_->step(model_->params);
    window_losses.clear();
    h = h.detach();
    h2 = h2.detach();
    instruction = model_->encode_instruction(episode.instruction_tokens);
  };

  for (size_t t = 0; t < rec.actions.size() && !simu.done(); ++t) {
    sim::Observation obs = simu.observe(noise_rng);
    mapping::project_observation(buffer, simu.pose(), obs);

    if (steps_since_replan == 0) {
      mapping::EgoMaps ego = mapping::render_egocentric(buffer, simu.pose(), settings_.spec);
      auto in = model_->make_step_input(ego, obs);
      auto out = model_->step(in, instruction, h, h2, /*training=*/true);
      h = out.h;
      h2 = out.h2;

      auto ls = mapping::semantic_loss(out.m_s_pred, in.gt_cat).loss;
      sup::CoarseGtGrid gt = sup::coarse_localization_gt(episode.path, simu.pose(),
                                                         settings_.spec, gt_mode, hard_thr);
      auto lo = sup::localization_loss(out.p_hat_grid, gt);
      sup::WaypointTarget wt =
          sup::waypoint_gt(scene, fields, episode.path, simu.pose(), wp_radius);
      auto lw = sup::waypoint_loss(out.w_hat, wt);
      sup::ProgressTarget pt = sup::progress_gt(simu.pose().position(), goal_field, start_goal);
      if (pt.valid) last_valid_p = pt.p;
      auto lp = sup::progress_loss(out.p_hat, pt.valid ? pt.p : last_valid_p);

      auto total = sup::total_loss(ls, lo, lp, lw, alpha, beta, gamma);
      window_losses.push_back(total);
      episode_loss += static_cast<double>(total.item());
      ++evals;
      ++global_eval_step_;

      if (metrics_log_) {
        nlohmann::json line;
        line["iter"] = current_iter_;
        line["epoch"] = epoch;
        line["step"] = global_eval_step_;
        line["l_s"] = static_cast<double>(ls.item());
        line["l_o"] = static_cast<double>(lo.item());
        line["l_w"] = static_cast<double>(lw.item());
        line["l_p"] = static_cast<double>(lp.item());
        line["L"] = static_cast<double>(total.item());
        (*metrics_log_) << line.dump() << "\n";
      }
      if (static_cast<int>(window_losses.size()) >= window) flush_window();
    }

    simu.step(rec.actions[t]);
    steps_since_replan = (steps_since_replan + 1) % settings_.replan_every;
  }
  flush_window();
  return evals > 0 ? episode_loss / static_cast<double>(evals) : 0.0;
}

void Trainer::save(const std::string& path) const { nav::save_model(path, *model_, cfg_); }

}  // namespace mgmap::train

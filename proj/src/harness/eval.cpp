#include "mgmap/harness/eval.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "mgmap/mapping/buffer.hpp"
#include "mgmap/mapping/grid_io.hpp"
#include "mgmap/nav/controller.hpp"
#include "mgmap/sim/oracle.hpp"
#include "mgmap/supervision/coarse_gt.hpp"
#include "mgmap/train/trainer.hpp"

namespace mgmap::harness {

using nlohmann::json;

EvalActor eval_actor_from_string(const std::string& s) {
  if (s == "checkpoint") return EvalActor::Checkpoint;
  if (s == "oracle") return EvalActor::Oracle;
  if (s == "zero") return EvalActor::Zero;
  throw DataError("unknown eval.policy: " + s);
}

namespace {

std::string sanitize_id(std::string s) {
  for (char& ch : s)
    if (ch == ':' || ch == '/') ch = '_';
  return s;
}

EpisodeResult eval_one(const Config& cfg, const world::Scene& scene,
                       const world::Episode& episode, EvalActor actor,
                       const nav::ModelF* model, world::FieldCache& fields,
                       const train::RolloutSettings& settings, uint64_t noise_seed,
                       const std::string& dump_dir, const std::string& trace_dir) {
  sim::Simulator simu(scene, settings.sim);
  simu.reset(episode.start);
  sim::Oracle oracle(scene, fields, settings.sim);
  mapping::AllocentricBuffer buffer = mapping::make_buffer(scene, settings.spec);
  Rng noise_rng(make_rng(noise_seed));

  const auto& goal_field = fields.at(episode.goal);
  double start_goal = goal_field.at(episode.start.position());
  double success_radius = cfg.getf("eval.success_radius");
  double iou_frac = cfg.getf("eval.iou_top_frac");

  ad::NoGradGuard no_grad;
  ad::Tensor instruction, h, h2;
  nav::AgentState agent;
  if (actor != EvalActor::Oracle) {
    instruction = model->encode_instruction(episode.instruction_tokens);
    h = ad::Tensor::zeros({model->cfg.gru_hidden});
    h2 = ad::Tensor::zeros({model->cfg.gru2_hidden});
  }

  std::vector<world::Pose> visited{simu.pose()};
  double iou_sum = 0;
  int iou_n = 0, wp_hits = 0, wp_n = 0;

  std::ofstream trace;
  if (!trace_dir.empty()) {
    std::filesystem::create_directories(trace_dir);
    trace.open(trace_dir + "/" + sanitize_id(episode.episode_id) + ".jsonl");
  }

  while (!simu.done()) {
    sim::Observation obs = simu.observe(noise_rng);
    mapping::project_observation(buffer, simu.pose(), obs);

    sim::Action action;
    if (actor == EvalActor::Oracle) {
      action = oracle.act(simu.pose(), episode);
    } else {
      bool head_eval = agent.steps_since_replan == 0;
      if (head_eval) {
        mapping::EgoMaps ego = mapping::render_egocentric(buffer, simu.pose(), settings.spec);
        auto in = model->make_step_input(ego, obs);
        auto out = model->step(in, instruction, h, h2, /*training=*/false);
        h = out.h;
        h2 = out.h2;
        agent.last_p_hat = static_cast<double>(out.p_hat.item());
        Vec2 w_agent{static_cast<double>(out.w_hat.at(0)),
                     static_cast<double>(out.w_hat.at(1))};
        agent.waypoint_world = mapping::MapSpec::agent_to_world(
            w_agent, simu.pose().position(), simu.pose().theta);
        agent.has_waypoint = true;

        sup::CoarseGtGrid gt = sup::coarse_localization_gt(
            episode.path, simu.pose(), settings.spec, sup::GtMode::Soft);
        std::vector<double> p_hat(out.p_hat_grid.values().begin(),
                                  out.p_hat_grid.values().end());
        iou_sum += localization_iou(gt.p, p_hat, iou_frac);
        ++iou_n;
        if (waypoint_in_path_area(settings.spec, w_agent.x, w_agent.y, gt.p, iou_frac))
          ++wp_hits;
        ++wp_n;

        if (!dump_dir.empty() && agent.head_evals == 0) {
          std::filesystem::create_directories(dump_dir);
          std::string base = dump_dir + "/" + sanitize_id(episode.episode_id);
          mapping::write_grid(base + "_P.mgg", settings.spec.m, settings.spec.m, 1, gt.p);
          mapping::write_grid(base + "_Phat.mgg", settings.spec.m, settings.spec.m, 1,
                              std::vector<float>(p_hat.begin(), p_hat.end()));
        }
        ++agent.head_evals;
      }
      double p_for_stop = head_eval ? agent.last_p_hat : 0.0;
      action = nav::waypoint_controller_action(scene, fields, simu.pose(),
                                               agent.waypoint_world, p_for_stop,
                                               settings.lambda_p, settings.sim.turn_deg);
      agent.steps_since_replan = (agent.steps_since_replan + 1) % settings.replan_every;
    }

    int collisions_before = simu.collisions();
    simu.step(action);
    visited.push_back(simu.pose());
    if (trace.is_open()) {
      json line;
      line["x"] = simu.pose().x;
      line["y"] = simu.pose().y;
      line["theta"] = simu.pose().theta;
      line["action"] = sim::action_name(action);
      line["collided"] = simu.collisions() > collisions_before;
      trace << line.dump() << "\n";
    }
  }

  EpisodeResult r = evaluate_episode(episode.episode_id, visited, simu.traveled(),
                                     simu.stop_called(), simu.steps(), simu.collisions(),
                                     goal_field, start_goal, success_radius);
  if (iou_n > 0) {
    r.mean_iou = iou_sum / iou_n;
    r.iou_samples = iou_n;
  }
  r.wp_hits = wp_hits;
  r.wp_samples = wp_n;
  return r;
}

}  // namespace

EvalReport run_eval(const Config& cfg, const std::map<std::string, world::Scene>& scenes,
                    const std::vector<world::Episode>& episodes, EvalActor actor,
                    const nav::ModelF* model, uint64_t seed, const std::string& dump_dir,
                    const std::string& trace_dir) {
  if (actor != EvalActor::Oracle && model == nullptr)
    throw UsageError("run_eval: model required for non-oracle actors");
  for (const auto& e : episodes)
    if (!scenes.count(e.scene_id))
      throw DataError("run_eval: missing scene " + e.scene_id + " for episode " + e.episode_id);

  train::RolloutSettings settings = train::settings_from_config(cfg);
  std::map<std::string, std::unique_ptr<world::FieldCache>> fields;
  EvalReport rep;
  long idx = 0;
  for (const auto& e : episodes) {
    auto it = fields.find(e.scene_id);
    if (it == fields.end())
      it = fields.emplace(e.scene_id,
                          std::make_unique<world::FieldCache>(scenes.at(e.scene_id), 192))
               .first;
    rep.episodes.push_back(eval_one(cfg, scenes.at(e.scene_id), e, actor, model, *it->second,
                                    settings, derive_seed(seed, "eval-noise", idx), dump_dir,
                                    trace_dir));
    ++idx;
  }

  long n = static_cast<long>(rep.episodes.size());
  long wp_hits = 0;
  for (const auto& r : rep.episodes) {
    rep.sr += r.success ? 1.0 : 0.0;
    rep.os += r.oracle_success ? 1.0 : 0.0;
    rep.spl += r.spl;
    rep.tl += r.tl;
    rep.ne += r.ne;
    if (r.iou_samples > 0) {
      rep.mean_iou += r.mean_iou;
      ++rep.episodes_with_iou;
    }
    wp_hits += r.wp_hits;
    rep.wp_samples += r.wp_samples;
  }
  if (n > 0) {
    rep.sr /= n;
    rep.os /= n;
    rep.spl /= n;
    rep.tl /= n;
    rep.ne /= n;
  }
  if (rep.episodes_with_iou > 0) rep.mean_iou /= rep.episodes_with_iou;
  if (rep.wp_samples > 0) rep.wp_hit_rate = static_cast<double>(wp_hits) / rep.wp_samples;
  return rep;
}

std::string EvalReport::episodes_jsonl() const {
  std::string out;
  for (const auto& r : episodes) {
    json j;
    j["episode_id"] = r.episode_id;
    j["success"] = r.success;
    j["oracle_success"] = r.oracle_success;
    j["tl"] = r.tl;
    j["ne"] = r.ne;
    j["spl"] = r.spl;
    j["steps"] = r.steps;
    j["collisions"] = r.collisions;
    if (r.iou_samples > 0) {
      j["mean_iou"] = r.mean_iou;
      j["iou_samples"] = r.iou_samples;
    }
    if (r.wp_samples > 0) {
      j["wp_hits"] = r.wp_hits;
      j["wp_samples"] = r.wp_samples;
    }
    out += j.dump() + "\n";
  }
  return out;
}

std::string EvalReport::to_json(const Config& cfg, uint64_t seed) const {
  json j;
  j["episodes"] = static_cast<long>(episodes.size());
  j["sr"] = sr;
  j["os"] = os;
  j["spl"] = spl;
  j["tl"] = tl;
  j["ne"] = ne;
  if (episodes_with_iou > 0) j["loc_iou"] = mean_iou;
  if (wp_samples > 0) j["waypoint_hit_rate"] = wp_hit_rate;
  j["seed"] = seed;
  json conf = json::object();
  for (const auto& [k, v] : cfg.values()) conf[k] = v;
  j["config"] = conf;
  return j.dump(2);
}

}  // namespace mgmap::harness

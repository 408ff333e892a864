#include "mgmap/train/rollout.hpp"

#include "mgmap/mapping/buffer.hpp"

namespace mgmap::train {

RolloutRecord collect_rollout(const world::Scene& scene, const world::Episode& episode,
                              const nav::ModelF* model, world::FieldCache& fields,
                              const RolloutSettings& settings, double oracle_prob,
                              uint64_t noise_seed, uint64_t mix_seed, CollectStats* stats) {
  RolloutRecord rec;
  rec.episode_id = episode.episode_id;
  rec.noise_seed = noise_seed;

  sim::Simulator simu(scene, settings.sim);
  simu.reset(episode.start);
  sim::Oracle oracle(scene, fields, settings.sim);
  mapping::AllocentricBuffer buffer = mapping::make_buffer(scene, settings.spec);
  Rng noise_rng(make_rng(noise_seed));
  Rng mix_rng(make_rng(mix_seed));
  std::bernoulli_distribution take_oracle(oracle_prob);

  ad::NoGradGuard no_grad;
  ad::Tensor instruction, h, h2;
  nav::AgentState agent;
  if (model) {
    instruction = model->encode_instruction(episode.instruction_tokens);
    h = ad::Tensor::zeros({model->cfg.gru_hidden});
    h2 = ad::Tensor::zeros({model->cfg.gru2_hidden});
  }

  while (!simu.done()) {
    sim::Observation obs = simu.observe(noise_rng);
    mapping::project_observation(buffer, simu.pose(), obs);

    sim::Action policy_action = sim::Action::Forward;
    if (model) {
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
        ++agent.head_evals;
        if (stats) ++stats->head_evals;
      }
      // The stop rule fires only on freshly evaluated progress.
      double p_for_stop = head_eval ? agent.last_p_hat : 0.0;
      policy_action = nav::waypoint_controller_action(scene, fields, simu.pose(),
                                                      agent.waypoint_world, p_for_stop,
                                                      settings.lambda_p,
                                                      settings.sim.turn_deg);
    }

    sim::Action oracle_action = oracle.act(simu.pose(), episode);
    bool use_oracle = model == nullptr || oracle_prob >= 1.0 || take_oracle(mix_rng);
    sim::Action exec = use_oracle ? oracle_action : policy_action;

    rec.actions.push_back(exec);
    rec.oracle_actions.push_back(oracle_action);
    rec.used_oracle.push_back(use_oracle ? 1 : 0);
    if (stats) {
      ++stats->steps;
      if (use_oracle) ++stats->oracle_steps;
    }

    simu.step(exec);
    agent.steps_since_replan = (agent.steps_since_replan + 1) % settings.replan_every;
  }
  return rec;
}

}  // namespace mgmap::train

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mgmap/ad/gradcheck.hpp"
#include "mgmap/nav/policy.hpp"
#include "mgmap/supervision/losses.hpp"

using namespace mgmap;

TEST_CASE("64-bit finite-difference suite covers every differentiable op") {
  auto reports = ad::run_op_suite(20, 20240901);
  CHECK(reports.size() >= 24);
  for (const auto& r : reports) {
    INFO(r.op, " max_rel_err=", r.max_rel_err);
    CHECK(r.cases >= 20);
    CHECK(r.max_rel_err < 1e-5);
  }
}

TEST_CASE("full-policy end-to-end gradient check") {
  double err = nav::policy_end_to_end_gradcheck(77, 3);
  INFO("max_rel_err=", err);
  CHECK(err < 1e-5);
}

TEST_CASE("full policy pass leaves no dead parameters") {
  // Every trainable tensor receives a finite gradient from the total loss.
  nav::ModelConfig mc;
  mc.spec = {20, 0.12, 4, 4, 8};
  mc.vocab_size = 12;
  mc.n_rays = 9;
  mc.feat_dim = 4;
  mc.embedding = 6;
  mc.lstm_hidden = 5;
  mc.gru_hidden = 12;
  mc.gru2_hidden = 10;
  mc.map_branch = 4;
  mc.halluc_base = 4;
  mc.map_pool = 5;
  mc.ray_hidden = 8;
  mc.ray_embed = 6;
  nav::Model<double> model(mc, 5);

  Rng rng(make_rng(99));
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  auto randt = [&](std::vector<int> shape) {
    auto t = ad::TensorT<double>::zeros(std::move(shape));
    for (long i = 0; i < t.numel(); ++i) t.data()[i] = val(rng);
    return t;
  };
  typename nav::Model<double>::StepInput in;
  in.m_f = randt({mc.spec.c_f, mc.spec.m, mc.spec.m});
  in.ray_feat = randt({mc.n_rays * mc.feat_dim});
  in.ray_depth = randt({mc.n_rays});
  in.gt_cat.assign(mc.spec.cells(), 0);
  std::vector<int> tokens = {1, 2, 3};
  auto h0 = randt({mc.gru_hidden});
  auto h20 = randt({mc.gru2_hidden});

  auto instruction = model.encode_instruction(tokens);
  auto out = model.step(in, instruction, h0, h20, true);
  sup::CoarseGtGrid gt;
  gt.m = mc.spec.m;
  gt.p.assign(mc.spec.cells(), 1.0 / mc.spec.cells());
  auto loss = sup::total_loss(mapping::semantic_loss(out.m_s_pred, in.gt_cat).loss,
                              sup::localization_loss(out.p_hat_grid, gt),
                              sup::progress_loss(out.p_hat, 0.3),
                              sup::waypoint_loss(out.w_hat, {0.5, 0.5}), 10, 10, 10);
  loss.backward();

  int nonzero_tensors = 0;
  for (const auto& [name, t] : model.params.entries()) {
    if (!t.requires_grad()) continue;
    INFO("param ", name);
    REQUIRE_FALSE(t.grad().empty());
    bool any_nonzero = false;
    for (double g : t.grad()) {
      CHECK(std::isfinite(g));
      any_nonzero = any_nonzero || g != 0.0;
    }
    if (any_nonzero) ++nonzero_tensors;
  }
  CHECK(nonzero_tensors >= 50);
}

#include "mgmap/nav/policy.hpp"

#include "mgmap/ad/checkpoint.hpp"
#include "mgmap/ad/gradcheck.hpp"
#include "mgmap/supervision/losses.hpp"

namespace mgmap::nav {

ModelConfig ModelConfig::from_config(const Config& cfg, int vocab_size) {
  ModelConfig mc;
  mc.spec.m = cfg.geti("map.m");
  mc.spec.cell = cfg.getf("map.cell");
  mc.spec.c_f = cfg.geti("model.attributes");
  mc.spec.c_s = cfg.geti("model.categories");
  mc.spec.c = cfg.geti("model.c");
  mc.vocab_size = vocab_size;
  mc.n_rays = cfg.geti("sim.n_rays");
  mc.feat_dim = cfg.geti("model.attributes");
  mc.max_range = cfg.getf("sim.max_range");
  mc.embedding = cfg.geti("model.embedding");
  mc.lstm_hidden = cfg.geti("model.lstm_hidden");
  mc.gru_hidden = cfg.geti("model.gru_hidden");
  mc.gru2_hidden = cfg.geti("model.gru2_hidden");
  mc.map_branch = cfg.geti("model.map_branch");
  mc.halluc_base = cfg.geti("model.halluc_base");
  mc.map_pool = cfg.geti("model.map_pool");
  mc.ray_hidden = cfg.geti("model.ray_hidden");
  mc.ray_embed = cfg.geti("model.ray_embed");
  mc.cosine_logits = cfg.getb("model.cosine_logits");
  mc.map_mode = mapping::map_mode_from_string(cfg.gets("model.map_mode"));
  mc.zero_init = cfg.getb("model.zero_init");
  return mc;
}

template <typename T>
Model<T>::Model(const ModelConfig& config, uint64_t seed) : cfg(config) {
  Rng rng(make_rng(derive_seed(seed, "model-init")));
  bool z = cfg.zero_init;
  halluc = mapping::HallucinationNet<T>(params, "map/halluc", cfg.spec, cfg.halluc_base, rng, z);
  encoder = mapping::MapEncoder<T>(params, "map/encoder", cfg.spec, cfg.map_branch,
                                   cfg.map_mode, rng, z);
  reduce = mapping::MapReduce<T>(params, "policy/reduce", cfg.spec.c, cfg.map_pool, rng, z);
  embedding = ad::Embedding<T>(params, "policy/embedding", cfg.vocab_size, cfg.embedding, rng, z);
  bilstm = ad::BiLSTM<T>(params, "policy/bilstm", cfg.embedding, cfg.lstm_hidden, rng, z);
  f_r1 = ad::Linear<T>(params, "policy/f_r1", cfg.n_rays * cfg.feat_dim, cfg.ray_hidden, rng, z);
  f_r2 = ad::Linear<T>(params, "policy/f_r2", cfg.ray_hidden, cfg.ray_embed, rng, z);
  f_d1 = ad::Linear<T>(params, "policy/f_d1", cfg.n_rays, cfg.ray_hidden, rng, z);
  f_d2 = ad::Linear<T>(params, "policy/f_d2", cfg.ray_hidden, cfg.ray_embed, rng, z);
  gru1 = ad::GRUCell<T>(params, "policy/gru1", cfg.map_pool + 2 * cfg.ray_embed,
                        cfg.gru_hidden, rng, z);
  att_q = ad::Linear<T>(params, "policy/att_q", cfg.gru_hidden, 2 * cfg.lstm_hidden, rng, z);
  w_q = ad::Linear<T>(params, "policy/w_q", 2 * cfg.lstm_hidden, cfg.spec.c, rng, z,
                      /*bias=*/false);
  w_k = ad::Conv2d<T>(params, "policy/w_k", cfg.spec.c, cfg.spec.c, 1, 1, 0, rng, z,
                      /*bias=*/false);
  gru2 = ad::GRUCell<T>(params, "policy/gru2",
                        cfg.spec.c + 2 * cfg.lstm_hidden + cfg.gru_hidden, cfg.gru2_hidden, rng,
                        z);
  w_head = ad::Linear<T>(params, "policy/w_head", cfg.gru2_hidden, 2, rng, z);
  p_head = ad::Linear<T>(params, "policy/p_head", cfg.gru2_hidden, 1, rng, z);
}

template <typename T>
ad::TensorT<T> Model<T>::encode_instruction(const std::vector<int>& tokens) const {
  if (tokens.empty()) throw DomainError("encode_instruction: empty instruction");
  return bilstm.forward(embedding.forward(tokens));
}

template <typename T>
ad::TensorT<T> Model<T>::state_encode(const ad::TensorT<T>& fused_map,
                                      const ad::TensorT<T>& ray_feat,
                                      const ad::TensorT<T>& ray_depth,
                                      const ad::TensorT<T>& h_prev) const {
  auto mr = reduce.forward(fused_map);
  auto fr = f_r2.forward(ad::relu(f_r1.forward(ray_feat)));
  auto fd = f_d2.forward(ad::relu(f_d1.forward(ray_depth)));
  auto x = ad::concat0(std::vector<ad::TensorT<T>>{mr, fr, fd});
  return gru1.forward(x, h_prev);
}

template <typename T>
ad::TensorT<T> Model<T>::attend_instruction(const ad::TensorT<T>& s,
                                            const ad::TensorT<T>& instruction) const {
  auto q = att_q.forward(s);
  return ad::scaled_dot_attention(q, instruction, instruction);
}

template <typename T>
ad::TensorT<T> Model<T>::predict_localization(const ad::TensorT<T>& inst_attended,
                                              const ad::TensorT<T>& fused_map) const {
  auto q = w_q.forward(inst_attended);
  auto keys = w_k.forward(fused_map);
  if (cfg.cosine_logits) {
    q = ad::l2_normalize(q);
    keys = ad::cell_l2_normalize(keys);
  }
  auto logits = ad::channel_dot(keys, q);
  int m = cfg.spec.m;
  auto flat = ad::reshape(logits, {m * m});
  return ad::reshape(ad::softmax(flat, 0), {m, m});
}

template <typename T>
typename Model<T>::StepInput Model<T>::make_step_input(const mapping::EgoMaps& ego,
                                                       const sim::Observation& obs) const {
  StepInput in;
  std::vector<T> feat(ego.feat.begin(), ego.feat.end());
  in.m_f = ad::TensorT<T>::from_data({cfg.spec.c_f, cfg.spec.m, cfg.spec.m}, std::move(feat));
  in.gt_cat = ego.gt_cat;
  std::vector<T> rf(obs.feat.begin(), obs.feat.end());
  in.ray_feat = ad::TensorT<T>::from_data({cfg.n_rays * cfg.feat_dim}, std::move(rf));
  std::vector<T> rd(obs.depth.size());
  for (size_t i = 0; i < rd.size(); ++i)
    rd[i] = static_cast<T>(obs.depth[i] / cfg.max_range);
  in.ray_depth = ad::TensorT<T>::from_data({cfg.n_rays}, std::move(rd));
  return in;
}

template <typename T>
typename Model<T>::StepOutput Model<T>::step(const StepInput& in,
                                             const ad::TensorT<T>& instruction,
                                             const ad::TensorT<T>& h_prev,
                                             const ad::TensorT<T>& h2_prev,
                                             bool training) const {
  StepOutput out;
  out.m_s_pred = halluc.forward(in.m_f, training);
  out.fused_map = encoder.forward(in.m_f, out.m_s_pred);
  out.h = state_encode(out.fused_map, in.ray_feat, in.ray_depth, h_prev);
  out.s = out.h;  // s_t = h_t by convention
  auto inst_attended = attend_instruction(out.s, instruction);
  out.p_hat_grid = predict_localization(inst_attended, out.fused_map);
  out.pooled = ad::map_pool(out.fused_map, out.p_hat_grid);
  out.h2 = gru2.forward(
      ad::concat0(std::vector<ad::TensorT<T>>{out.pooled, inst_attended, out.s}), h2_prev);
  out.s2 = out.h2;
  out.w_hat = w_head.forward(out.s2);
  out.p_hat = ad::sigmoid(p_head.forward(out.s2));
  return out;
}

template struct Model<float>;
template struct Model<double>;

void save_model(const std::string& path, const Model<float>& model, const Config& cfg) {
  ad::CheckpointMap entries;
  for (const auto& [name, t] : model.params.entries()) {
    ad::CheckpointEntry e;
    e.shape = t.shape();
    e.data.assign(t.values().begin(), t.values().end());
    entries[name] = std::move(e);
  }
  entries["meta/config"] = ad::encode_text(cfg.serialized());
  entries["meta/arch_hash"] = ad::encode_hash(cfg.arch_hash());
  ad::write_mgt1(path, entries);
}

void load_model(const std::string& path, Model<float>& model, const Config& cfg, bool force) {
  ad::CheckpointMap entries = ad::read_mgt1(path);
  auto hash_it = entries.find("meta/arch_hash");
  if (hash_it != entries.end()) {
    uint64_t stored = ad::decode_hash(hash_it->second);
    if (stored != cfg.arch_hash() && !force)
      throw DataError(
          "checkpoint architecture hash mismatch (use --force-load to override): " + path);
  } else if (!force) {
    throw DataError("checkpoint missing architecture hash: " + path);
  }
  for (auto& [name, t] : const_cast<std::map<std::string, ad::Tensor>&>(model.params.entries())) {
    auto it = entries.find(name);
    if (it == entries.end()) throw DataError("checkpoint missing parameter: " + name);
    if (it->second.shape != t.shape())
      throw DataError("checkpoint shape mismatch for " + name + ": stored " +
                      [&] {
                        std::string s = "(";
                        for (size_t i = 0; i < it->second.shape.size(); ++i)
                          s += std::to_string(it->second.shape[i]) +
                               (i + 1 < it->second.shape.size() ? "," : "");
                        return s + ")";
                      }() +
                      " vs model " + t.shape_str());
    std::copy(it->second.data.begin(), it->second.data.end(), t.values().begin());
  }
}

double policy_end_to_end_gradcheck(uint64_t seed, int probes_per_tensor) {
  ModelConfig mc;
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

  Model<double> model(mc, seed);
  Rng rng(make_rng(derive_seed(seed, "policy-e2e")));
  std::uniform_real_distribution<double> val(-1.0, 1.0);

  typename Model<double>::StepInput in;
  auto randt = [&](std::vector<int> shape) {
    auto t = ad::TensorT<double>::zeros(std::move(shape));
    for (long i = 0; i < t.numel(); ++i) t.data()[i] = val(rng);
    return t;
  };
  in.m_f = randt({mc.spec.c_f, mc.spec.m, mc.spec.m});
  in.ray_feat = randt({mc.n_rays * mc.feat_dim});
  in.ray_depth = randt({mc.n_rays});
  in.gt_cat.resize(mc.spec.cells());
  std::uniform_int_distribution<int> lab(-1, mc.spec.c_s - 1);
  for (auto& l : in.gt_cat) l = lab(rng);
  std::vector<int> tokens = {1, 2, 3, 4, 2};
  auto h0 = randt({mc.gru_hidden});
  auto h20 = randt({mc.gru2_hidden});

  sup::CoarseGtGrid gt;
  gt.m = mc.spec.m;
  gt.p.assign(mc.spec.cells(), 1.0 / mc.spec.cells());

  sup::WaypointTarget wt{1.0, -0.5};

  auto loss_fn = [&]() {
    auto instruction = model.encode_instruction(tokens);
    auto out = model.step(in, instruction, h0, h20, /*training=*/true);
    auto ls = mapping::semantic_loss(out.m_s_pred, in.gt_cat).loss;
    auto lo = sup::localization_loss(out.p_hat_grid, gt);
    auto lw = sup::waypoint_loss(out.w_hat, wt);
    auto lp = sup::progress_loss(out.p_hat, 0.4);
    return sup::total_loss(ls, lo, lp, lw, 10.0, 10.0, 10.0);
  };

  std::vector<ad::TensorT<double>> inputs;
  for (const auto& [name, t] : model.params.entries())
    if (t.requires_grad()) inputs.push_back(t);
  inputs.push_back(in.m_f);
  in.m_f.node()->requires_grad = true;
  in.m_f.node()->needs_grad = true;

  return check_gradient(loss_fn, inputs, 1e-5, probes_per_tensor,
                        derive_seed(seed, "e2e-probes"));
}

}  // namespace mgmap::nav

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "mgmap/ad/adam.hpp"
#include "mgmap/ad/nn.hpp"
#include "mgmap/core/config.hpp"
#include "mgmap/mapping/buffer.hpp"
#include "mgmap/mapping/nets.hpp"
#include "mgmap/sim/simulator.hpp"

namespace mgmap::nav {

struct ModelConfig {
  mapping::MapSpec spec;
  int vocab_size = 0;
  int n_rays = 64;
  int feat_dim = 8;
  double max_range = 5.0;
  int embedding = 32;
  int lstm_hidden = 32;
  int gru_hidden = 128;
  int gru2_hidden = 128;
  int map_branch = 16;
  int halluc_base = 16;
  int map_pool = 16;
  int ray_hidden = 64;
  int ray_embed = 32;
  bool cosine_logits = false;
  mapping::MapMode map_mode = mapping::MapMode::Multi;
  bool zero_init = false;

  static ModelConfig from_config(const Config& cfg, int vocab_size);
};

// The whole trainable model: mapping networks plus the navigation policy.
// All parameters live in a single named ParamSet for checkpoints/Adam.
template <typename T>
struct Model {
  ModelConfig cfg;
  ad::ParamSet<T> params;

  mapping::HallucinationNet<T> halluc;
  mapping::MapEncoder<T> encoder;
  mapping::MapReduce<T> reduce;

  ad::Embedding<T> embedding;
  ad::BiLSTM<T> bilstm;
  ad::Linear<T> f_r1, f_r2;  // ray-feature encoder
  ad::Linear<T> f_d1, f_d2;  // ray-depth encoder
  ad::GRUCell<T> gru1;
  ad::Linear<T> att_q;  // query projection onto the instruction width
  ad::Linear<T> w_q;    // Eq.-3 query projection
  ad::Conv2d<T> w_k;    // Eq.-3 key projection, applied per cell (1x1 conv)
  ad::GRUCell<T> gru2;
  ad::Linear<T> w_head, p_head;

  Model(const ModelConfig& cfg, uint64_t seed);

  // Per-token instruction features (L, 2*lstm_hidden).
  ad::TensorT<T> encode_instruction(const std::vector<int>& tokens) const;

  struct StepInput {
    ad::TensorT<T> m_f;        // (c_f, m, m)
    std::vector<int> gt_cat;   // m*m, -1 unknown (training targets)
    ad::TensorT<T> ray_feat;   // (n_rays * feat_dim)
    ad::TensorT<T> ray_depth;  // (n_rays), normalized by max_range
  };

  struct StepOutput {
    ad::TensorT<T> m_s_pred;    // (c_s, m, m)
    ad::TensorT<T> fused_map;   // (c, m, m)
    ad::TensorT<T> p_hat_grid;  // (m, m), sums to 1
    ad::TensorT<T> pooled;      // (c)
    ad::TensorT<T> s;           // GRU-1 state
    ad::TensorT<T> h;           // = s (kept distinct for clarity)
    ad::TensorT<T> s2;          // GRU-2 state
    ad::TensorT<T> h2;
    ad::TensorT<T> w_hat;       // (2) agent frame
    ad::TensorT<T> p_hat;       // (1) in [0,1]
  };

  StepOutput step(const StepInput& in, const ad::TensorT<T>& instruction,
                  const ad::TensorT<T>& h_prev, const ad::TensorT<T>& h2_prev,
                  bool training) const;

  // Individual stages, exposed for unit tests.
  ad::TensorT<T> state_encode(const ad::TensorT<T>& fused_map, const ad::TensorT<T>& ray_feat,
                              const ad::TensorT<T>& ray_depth,
                              const ad::TensorT<T>& h_prev) const;
  ad::TensorT<T> attend_instruction(const ad::TensorT<T>& s,
                                    const ad::TensorT<T>& instruction) const;
  ad::TensorT<T> predict_localization(const ad::TensorT<T>& inst_attended,
                                      const ad::TensorT<T>& fused_map) const;

  StepInput make_step_input(const mapping::EgoMaps& ego, const sim::Observation& obs) const;
};

using ModelF = Model<float>;

// Checkpoint round trip. Loading verifies the architecture hash (unless
// forced) and every entry's name/shape, naming the first offender.
void save_model(const std::string& path, const Model<float>& model, const Config& cfg);
void load_model(const std::string& path, Model<float>& model, const Config& cfg,
                bool force = false);

// Full-policy finite-difference check (64-bit): random inputs, total loss,
// a sample of entries from every parameter tensor. Returns max relative error.
double policy_end_to_end_gradcheck(uint64_t seed, int probes_per_tensor = 4);

}  // namespace mgmap::nav

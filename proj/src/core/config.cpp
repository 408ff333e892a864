#include "mgmap/core/config.hpp"

#include <fstream>
#include <sstream>

#include "mgmap/core/errors.hpp"
#include "mgmap/core/rng.hpp"

namespace mgmap {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::map<std::string, Config::Entry> build_registry() {
  std::map<std::string, Config::Entry> r;
  auto add = [&](const char* k, const char* def, const char* doc) { r[k] = {def, doc}; };

  add("run.seed", "1", "master seed for generation, init, noise and sampling");
  add("run.threads", "0", "kernel worker threads; 0 = min(hardware, 4)");

  add("world.num_scenes", "8", "scenes generated by gen-world");
  add("world.bounds_min", "10.0", "minimum scene side length (m)");
  add("world.bounds_max", "13.0", "maximum scene side length (m)");
  add("world.objects", "12", "objects per scene");
  add("world.dividers", "3", "interior divider walls per scene");
  add("world.ambiguity_fraction", "0.33",
      "minimum fraction of objects with a same-category partner within 4 m");
  add("world.clearance", "0.10", "obstacle inflation for the free-space grid (m)");

  add("episodes.per_scene", "10", "episodes sampled per scene");
  add("episodes.min_len", "4.0", "minimum start-goal geodesic distance (m)");
  add("episodes.max_len", "9.0", "maximum start-goal geodesic distance (m)");
  add("episodes.landmark_radius", "1.5", "max landmark distance from the path (m)");

  add("sim.n_rays", "64", "rays per observation");
  add("sim.fov_deg", "90.0", "horizontal field of view (degrees)");
  add("sim.max_range", "5.0", "depth clamp (m)");
  add("sim.noise_sigma", "0.02", "gaussian noise on observed ray features");
  add("sim.forward_step", "0.25", "forward translation per action (m)");
  add("sim.turn_deg", "15.0", "rotation per turn action (degrees)");
  add("sim.step_budget", "500", "max low-level actions per episode");

  add("map.m", "100", "egocentric map cells per side");
  add("map.cell", "0.12", "map cell size (m)");

  add("model.categories", "8", "semantic categories K (id 0 = wall, 1 = free space)");
  add("model.attributes", "8", "fine-grained attribute channels F");
  add("model.c", "32", "fused multi-granularity map channels");
  add("model.embedding", "32", "instruction token embedding size");
  add("model.lstm_hidden", "32", "BiLSTM hidden size per direction");
  add("model.gru_hidden", "128", "state encoder GRU hidden size");
  add("model.gru2_hidden", "128", "fused state GRU hidden size");
  add("model.map_branch", "16", "map encoder per-branch channels");
  add("model.halluc_base", "16", "hallucination net base width");
  add("model.map_pool", "16", "channels of the strided map reduction for GRU-1");
  add("model.ray_hidden", "64", "hidden width of the f_R/f_D ray encoders");
  add("model.ray_embed", "32", "output width of the f_R/f_D ray encoders");
  add("model.cosine_logits", "false",
      "L2-normalize localization query and keys before the dot product");
  add("model.map_mode", "multi", "map ablation: multi | semantic_only | fine_only");
  add("model.zero_init", "false", "zero-initialize all parameters (sanity baseline)");

  add("supervision.gt_mode", "soft", "coarse localization ground truth: soft | hard");
  add("supervision.hard_threshold", "0.72", "hard-GT cell-to-path distance threshold (m)");
  add("supervision.waypoint_radius", "3.0", "waypoint ground-truth circle radius (m)");

  add("train.lr", "2.5e-4", "Adam learning rate");
  add("train.alpha", "10.0", "weight of the localization loss");
  add("train.beta", "10.0", "weight of the progress loss");
  add("train.gamma", "10.0", "weight of the waypoint loss");
  add("train.lambda_p", "0.8", "progress threshold that triggers STOP");
  add("train.teacher_epochs", "4", "teacher-forcing epochs");
  add("train.dagger_iterations", "4", "DAgger iterations");
  add("train.trajectories_per_iter", "200", "rollouts collected per DAgger iteration");
  add("train.epochs_per_iter", "4", "training epochs per DAgger iteration");
  add("train.bptt_window", "12", "truncated backprop window in head evaluations");
  add("train.grad_clip", "5.0", "global gradient-norm clip");
  add("train.replan_every", "3", "steps between waypoint/progress head evaluations");
  add("train.checkpoint_every", "0", "extra checkpoint cadence in iterations; 0 = final only");

  add("eval.success_radius", "3.0", "geodesic success threshold (m)");
  add("eval.iou_top_frac", "0.10", "mass fraction defining localization masks");
  add("eval.policy", "checkpoint", "eval actor: checkpoint | oracle | zero");

  return r;
}

}  // namespace

const std::map<std::string, Config::Entry>& Config::registry() {
  static const std::map<std::string, Entry> r = build_registry();
  return r;
}

Config::Config() {
  for (const auto& [k, e] : registry()) values_[k] = e.def;
}

void Config::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw UsageError("unknown config key: " + key);
  it->second = trim(value);
}

void Config::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw DataError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    try {
      set(key, val);
    } catch (const UsageError& e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

const std::string& Config::raw(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw UsageError("unknown config key: " + key);
  return it->second;
}

int Config::geti(const std::string& key) const { return static_cast<int>(getl(key)); }

long Config::getl(const std::string& key) const {
  const std::string& v = raw(key);
  size_t pos = 0;
  long out = 0;
  try {
    out = std::stol(v, &pos);
  } catch (...) {
    throw DataError("config key " + key + ": not an integer: '" + v + "'");
  }
  if (pos != v.size()) throw DataError("config key " + key + ": not an integer: '" + v + "'");
  return out;
}

double Config::getf(const std::string& key) const {
  const std::string& v = raw(key);
  size_t pos = 0;
  double out = 0;
  try {
    out = std::stod(v, &pos);
  } catch (...) {
    throw DataError("config key " + key + ": not a number: '" + v + "'");
  }
  if (pos != v.size()) throw DataError("config key " + key + ": not a number: '" + v + "'");
  return out;
}

bool Config::getb(const std::string& key) const {
  const std::string& v = raw(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw DataError("config key " + key + ": not a boolean: '" + v + "'");
}

const std::string& Config::gets(const std::string& key) const { return raw(key); }

std::string Config::serialized() const {
  std::ostringstream out;
  for (const auto& [k, v] : values_) out << k << " = " << v << "\n";
  return out.str();
}

uint64_t Config::arch_hash() const {
  std::ostringstream out;
  for (const auto& [k, v] : values_) {
    if (k.rfind("model.", 0) == 0 || k.rfind("map.", 0) == 0 || k == "sim.n_rays")
      out << k << "=" << v << ";";
  }
  return fnv1a64(out.str());
}

}  // namespace mgmap

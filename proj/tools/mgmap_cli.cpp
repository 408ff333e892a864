#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mgmap/ad/checkpoint.hpp"
#include "mgmap/ad/gradcheck.hpp"
#include "mgmap/core/config.hpp"
#include "mgmap/core/errors.hpp"
#include "mgmap/core/parallel.hpp"
#include "mgmap/harness/eval.hpp"
#include "mgmap/mapping/grid_io.hpp"
#include "mgmap/train/trainer.hpp"
#include "mgmap/world/generate.hpp"

namespace fs = std::filesystem;
using namespace mgmap;

namespace {

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> sets;
  long seed = -1;
  std::string out = "out";
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "config file of 'key = value' lines");
  cmd->add_option("--set", o.sets, "override a config key (key=value, repeatable)");
  cmd->add_option("--seed", o.seed, "override run.seed");
  cmd->add_option("--out", o.out, "output directory");
}

Config resolve_config(const CommonOpts& o) {
  Config cfg;
  if (!o.config_path.empty()) cfg.load_file(o.config_path);
  for (const auto& s : o.sets) {
    auto eq = s.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got: " + s);
    cfg.set(s.substr(0, eq), s.substr(eq + 1));
  }
  if (o.seed >= 0) cfg.set("run.seed", std::to_string(o.seed));
  set_kernel_threads(cfg.geti("run.threads"));
  return cfg;
}

world::WorldGenParams world_params(const Config& cfg) {
  world::WorldGenParams p;
  p.bounds_min = cfg.getf("world.bounds_min");
  p.bounds_max = cfg.getf("world.bounds_max");
  p.objects = cfg.geti("world.objects");
  p.dividers = cfg.geti("world.dividers");
  p.ambiguity_fraction = cfg.getf("world.ambiguity_fraction");
  p.clearance = cfg.getf("world.clearance");
  p.num_categories = cfg.geti("model.categories");
  return p;
}

world::EpisodeGenParams episode_params(const Config& cfg) {
  world::EpisodeGenParams p;
  p.min_len = cfg.getf("episodes.min_len");
  p.max_len = cfg.getf("episodes.max_len");
  p.landmark_radius = cfg.getf("episodes.landmark_radius");
  return p;
}

std::map<std::string, world::Scene> load_scene_dir(const std::string& dir) {
  std::map<std::string, world::Scene> scenes;
  std::vector<std::string> files;
  if (!fs::is_directory(dir)) throw DataError("not a scene directory: " + dir);
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".json") files.push_back(entry.path().string());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    world::Scene s = world::read_scene(f);
    scenes.emplace(s.id, std::move(s));
  }
  if (scenes.empty()) throw DataError("no scene JSON files in " + dir);
  return scenes;
}

void echo_config(const Config& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  std::ofstream out(out_dir + "/config.txt");
  out << cfg.serialized();
}

int cmd_gen_world(const CommonOpts& o) {
  Config cfg = resolve_config(o);
  uint64_t seed = cfg.getl("run.seed");
  fs::create_directories(o.out + "/scenes");
  int n = cfg.geti("world.num_scenes");
  for (int i = 0; i < n; ++i) {
    world::Scene scene = world::generate_scene(derive_seed(seed, "world", i),
                                               world_params(cfg));
    world::write_scene(o.out + "/scenes/" + scene.id + ".json", scene);
    std::cout << "wrote " << o.out << "/scenes/" << scene.id << ".json\n";
  }
  echo_config(cfg, o.out);
  return 0;
}

int cmd_gen_episodes(const CommonOpts& o, const std::string& scene_dir) {
  Config cfg = resolve_config(o);
  uint64_t seed = cfg.getl("run.seed");
  auto scenes = load_scene_dir(scene_dir);
  world::Vocab vocab;
  std::vector<world::Episode> episodes;
  int per_scene = cfg.geti("episodes.per_scene");
  long scene_idx = 0;
  for (const auto& [id, scene] : scenes) {
    auto eps = world::sample_episodes(scene, derive_seed(seed, "episodes", scene_idx),
                                      episode_params(cfg), vocab, per_scene);
    episodes.insert(episodes.end(), eps.begin(), eps.end());
    ++scene_idx;
  }
  fs::create_directories(o.out);
  world::write_episodes(o.out + "/episodes.jsonl", episodes);
  echo_config(cfg, o.out);
  std::cout << "wrote " << episodes.size() << " episodes to " << o.out
            << "/episodes.jsonl\n";
  return 0;
}

int cmd_train(const CommonOpts& o, const std::string& scene_dir,
              const std::string& episodes_path, const std::string& resume, bool dagger_only) {
  Config cfg = resolve_config(o);
  auto scenes = load_scene_dir(scene_dir);
  auto episodes = world::read_episodes(episodes_path);
  fs::create_directories(o.out);
  std::ofstream log(o.out + "/train_log.jsonl");
  train::Trainer trainer(cfg, std::move(scenes), std::move(episodes), &log);
  if (!resume.empty()) nav::load_model(resume, trainer.model(), cfg);
  if (dagger_only) {
    trainer.dagger_phase(cfg.geti("train.dagger_iterations"));
  } else {
    trainer.teacher_phase();
  }
  std::string ckpt = o.out + "/checkpoint.mgt";
  trainer.save(ckpt);
  echo_config(cfg, o.out);
  std::cout << "saved " << ckpt << " after " << trainer.adam_steps() << " optimizer steps\n";
  return 0;
}

int cmd_eval(const CommonOpts& o, const std::string& scene_dir,
             const std::string& episodes_path, const std::string& checkpoint, bool force_load,
             bool dump_grids, bool traces) {
  Config cfg = resolve_config(o);
  auto scenes = load_scene_dir(scene_dir);
  auto episodes = world::read_episodes(episodes_path);
  harness::EvalActor actor = harness::eval_actor_from_string(cfg.gets("eval.policy"));

  std::unique_ptr<nav::ModelF> model;
  if (actor != harness::EvalActor::Oracle) {
    Config model_cfg = cfg;
    if (actor == harness::EvalActor::Zero) model_cfg.set("model.zero_init", "true");
    world::Vocab vocab;
    model = std::make_unique<nav::ModelF>(
        nav::ModelConfig::from_config(model_cfg, vocab.size()), cfg.getl("run.seed"));
    if (actor == harness::EvalActor::Checkpoint) {
      if (checkpoint.empty()) throw UsageError("eval: --checkpoint required");
      nav::load_model(checkpoint, *model, cfg, force_load);
    }
  }
  fs::create_directories(o.out);
  harness::EvalReport rep =
      harness::run_eval(cfg, scenes, episodes, actor, model.get(), cfg.getl("run.seed"),
                        dump_grids ? o.out + "/grids" : "", traces ? o.out + "/traces" : "");
  {
    std::ofstream out(o.out + "/report.json");
    out << rep.to_json(cfg, cfg.getl("run.seed")) << "\n";
  }
  {
    std::ofstream out(o.out + "/episodes_results.jsonl");
    out << rep.episodes_jsonl();
  }
  echo_config(cfg, o.out);
  std::cout << "SR " << rep.sr << "  OS " << rep.os << "  SPL " << rep.spl << "  TL " << rep.tl
            << "  NE " << rep.ne;
  if (rep.episodes_with_iou > 0) std::cout << "  IoU " << rep.mean_iou;
  if (rep.wp_samples > 0) std::cout << "  WP-hit " << rep.wp_hit_rate;
  std::cout << "\n";
  return 0;
}

int cmd_gradcheck(const CommonOpts& o) {
  Config cfg = resolve_config(o);
  uint64_t seed = cfg.getl("run.seed");
  bool ok = true;
  auto reports = ad::run_op_suite(20, seed);
  for (const auto& r : reports) {
    std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.op << "  cases=" << r.cases
              << "  max_rel_err=" << r.max_rel_err << "\n";
    ok = ok && r.pass;
  }
  double e2e = nav::policy_end_to_end_gradcheck(seed);
  bool e2e_ok = e2e < 1e-5;
  std::cout << (e2e_ok ? "[PASS] " : "[FAIL] ") << "policy_end_to_end  max_rel_err=" << e2e
            << "\n";
  ok = ok && e2e_ok;
  if (!ok) throw NumericError("gradient checks failed");
  return 0;
}

int cmd_inspect(const std::string& kind, const std::string& file, const std::string& out,
                int channel) {
  if (kind == "grid") {
    mapping::GridDump g = mapping::read_grid(file);
    if (out.size() > 4 && out.substr(out.size() - 4) == ".ppm") {
      if (channel < 0 || channel >= g.channels) throw UsageError("bad --channel");
      mapping::write_ppm_heat(out, g.rows, g.cols,
                              g.data.data() + static_cast<long>(channel) * g.rows * g.cols);
    } else {
      mapping::write_grid_csv(out, g);
    }
    std::cout << "grid " << g.rows << "x" << g.cols << "x" << g.channels << " -> " << out
              << "\n";
    return 0;
  }
  if (kind == "checkpoint") {
    auto entries = ad::read_mgt1(file);
    for (const auto& [name, e] : entries) {
      std::cout << name << "  (";
      for (size_t i = 0; i < e.shape.size(); ++i)
        std::cout << e.shape[i] << (i + 1 < e.shape.size() ? "," : "");
      std::cout << ")\n";
    }
    return 0;
  }
  if (kind == "scene") {
    world::Scene s = world::read_scene(file);
    const auto& g = s.grid;
    std::vector<float> img(static_cast<long>(g.ny) * g.nx);
    for (int iy = 0; iy < g.ny; ++iy)
      for (int ix = 0; ix < g.nx; ++ix)
        img[static_cast<long>(g.ny - 1 - iy) * g.nx + ix] =
            g.blocked[g.index(ix, iy)] ? 1.0f : (g.component[g.index(ix, iy)] ? 0.0f : 0.5f);
    mapping::write_ppm_heat(out, g.ny, g.nx, img.data());
    std::cout << "scene occupancy -> " << out << "\n";
    return 0;
  }
  if (kind == "trace") {
    std::ifstream in(file);
    if (!in) throw DataError("cannot open trace: " + file);
    std::ofstream csv(out);
    csv << "x,y,theta,action,collided\n";
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      try {
        auto j = nlohmann::json::parse(line);
        csv << j.at("x").get<double>() << "," << j.at("y").get<double>() << ","
            << j.at("theta").get<double>() << "," << j.at("action").get<std::string>() << ","
            << (j.at("collided").get<bool>() ? 1 : 0) << "\n";
      } catch (const nlohmann::json::exception& e) {
        throw DataError("trace line " + std::to_string(lineno) + ": " + e.what());
      }
    }
    std::cout << "trace -> " << out << "\n";
    return 0;
  }
  throw UsageError("inspect: unknown kind " + kind + " (grid|checkpoint|scene|trace)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mgmap: multi-granularity map navigation testbed"};
  app.require_subcommand(1);

  CommonOpts gw_o, ge_o, tr_o, dg_o, ev_o, gc_o;
  std::string ge_scenes, tr_scenes, tr_episodes, tr_resume, dg_scenes, dg_episodes, dg_resume;
  std::string ev_scenes, ev_episodes, ev_checkpoint;
  bool ev_force = false, ev_dump = false, ev_traces = false;
  std::string in_kind, in_file, in_out = "out.csv";
  int in_channel = 0;

  auto* gw = app.add_subcommand("gen-world", "generate synthetic scenes");
  add_common(gw, gw_o);

  auto* ge = app.add_subcommand("gen-episodes", "sample episodes with instructions");
  add_common(ge, ge_o);
  ge->add_option("--scenes", ge_scenes, "scene directory")->required();

  auto* tr = app.add_subcommand("train", "teacher-forcing training");
  add_common(tr, tr_o);
  tr->add_option("--scenes", tr_scenes)->required();
  tr->add_option("--episodes", tr_episodes)->required();
  tr->add_option("--resume", tr_resume, "checkpoint to continue from");

  auto* dg = app.add_subcommand("dagger", "DAgger fine-tuning");
  add_common(dg, dg_o);
  dg->add_option("--scenes", dg_scenes)->required();
  dg->add_option("--episodes", dg_episodes)->required();
  dg->add_option("--checkpoint", dg_resume, "checkpoint to fine-tune")->required();

  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint / oracle / zero policy");
  add_common(ev, ev_o);
  ev->add_option("--scenes", ev_scenes)->required();
  ev->add_option("--episodes", ev_episodes)->required();
  ev->add_option("--checkpoint", ev_checkpoint);
  ev->add_flag("--force-load", ev_force, "skip the architecture hash check");
  ev->add_flag("--dump-grids", ev_dump, "dump first-step P / P-hat grids per episode");
  ev->add_flag("--traces", ev_traces, "write per-step trajectory traces");

  auto* gc = app.add_subcommand("gradcheck", "finite-difference gradient suite (64-bit)");
  add_common(gc, gc_o);

  auto* in = app.add_subcommand("inspect", "dump grids/checkpoints/scenes/traces");
  in->add_option("kind", in_kind, "grid | checkpoint | scene | trace")->required();
  in->add_option("file", in_file)->required();
  in->add_option("--out", in_out, "output file (.csv or .ppm)");
  in->add_option("--channel", in_channel, "channel for .ppm output");

  try {
    app.parse(argc, argv);
    if (gw->parsed()) return cmd_gen_world(gw_o);
    if (ge->parsed()) return cmd_gen_episodes(ge_o, ge_scenes);
    if (tr->parsed()) return cmd_train(tr_o, tr_scenes, tr_episodes, tr_resume, false);
    if (dg->parsed()) return cmd_train(dg_o, dg_scenes, dg_episodes, dg_resume, true);
    if (ev->parsed())
      return cmd_eval(ev_o, ev_scenes, ev_episodes, ev_checkpoint, ev_force, ev_dump,
                      ev_traces);
    if (gc->parsed()) return cmd_gradcheck(gc_o);
    if (in->parsed()) return cmd_inspect(in_kind, in_file, in_out, in_channel);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

#include "mgmap/world/generate.hpp"

#include <algorithm>

#include "mgmap/core/errors.hpp"
#include "mgmap/core/rng.hpp"
#include "mgmap/world/geodesic.hpp"

namespace mgmap::world {

namespace {

constexpr double kPairMax = 4.0;     // partner must be within this (center distance)
constexpr double kPairMin = 1.2;     // and not stacked on top of its mate
constexpr double kNonPairMin = 4.3;  // same-category non-partners stay beyond 4 m

double bounding_radius(const Footprint& f) {
  if (f.kind == Footprint::Kind::Disc) return f.radius;
  return std::sqrt(f.hw * f.hw + f.hh * f.hh);
}

struct ObjectPlan {
  int category = kFirstObjectCategory;
  int color = 0, material = 0, shape = 0;
  int partner = -1;  // index of the planned ambiguity partner, -1 for singles
};

Footprint random_footprint(Rng& rng) {
  Footprint f;
  std::uniform_int_distribution<int> kind(0, 1);
  if (kind(rng) == 0) {
    f.kind = Footprint::Kind::Disc;
    f.radius = std::uniform_real_distribution<double>(0.25, 0.45)(rng);
  } else {
    f.kind = Footprint::Kind::Rect;
    f.hw = std::uniform_real_distribution<double>(0.25, 0.45)(rng);
    f.hh = std::uniform_real_distribution<double>(0.25, 0.45)(rng);
  }
  return f;
}

bool placement_ok(const Scene& scene, const std::vector<SceneObject>& placed,
                  const std::vector<ObjectPlan>& plans, const Vec2& pos, const Footprint& fp,
                  const ObjectPlan& plan, int self_index) {
  double rb = bounding_radius(fp);
  if (pos.x < scene.bounds.xmin + 0.6 + rb || pos.x > scene.bounds.xmax - 0.6 - rb ||
      pos.y < scene.bounds.ymin + 0.6 + rb || pos.y > scene.bounds.ymax - 0.6 - rb)
    return false;
  for (const auto& w : scene.walls)
    if (point_segment_distance(pos, w) < rb + 0.45) return false;
  for (size_t i = 0; i < placed.size(); ++i) {
    const auto& o = placed[i];
    double gap = (pos - o.center).norm() - rb - bounding_radius(o.footprint);
    if (gap < 0.65) return false;
    if (o.category_id == plan.category) {
      double d = (pos - o.center).norm();
      bool partners = plan.partner == static_cast<int>(i) ||
                      plans[i].partner == self_index;
      if (partners) {
        if (d < kPairMin || d > kPairMax - 0.2) return false;
      } else if (d < kNonPairMin) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace

Scene generate_scene(uint64_t seed, const WorldGenParams& params) {
  if (params.num_categories < kFirstObjectCategory + 1)
    throw GenerationError("generate_scene: need at least one object category");

  for (int attempt = 0; attempt < params.max_attempts; ++attempt) {
    Rng rng(make_rng(derive_seed(seed, "scene", static_cast<uint64_t>(attempt))));

    Scene scene;
    scene.id = "scene-" + std::to_string(seed);
    scene.num_categories = params.num_categories;
    scene.clearance = params.clearance;
    std::uniform_real_distribution<double> side(params.bounds_min, params.bounds_max);
    double w = side(rng), h = side(rng);
    scene.bounds = {0.0, 0.0, w, h};
    scene.walls.push_back({{0, 0}, {w, 0}});
    scene.walls.push_back({{w, 0}, {w, h}});
    scene.walls.push_back({{w, h}, {0, h}});
    scene.walls.push_back({{0, h}, {0, 0}});

    // Interior dividers with door gaps, spaced apart per orientation.
    std::vector<double> used_x, used_y;
    for (int d = 0; d < params.dividers; ++d) {
      bool vertical = std::uniform_int_distribution<int>(0, 1)(rng) == 0;
      double span = vertical ? w : h;
      double cross = vertical ? h : w;
      auto& used = vertical ? used_x : used_y;
      double coord = 0;
      bool found = false;
      for (int t = 0; t < 40 && !found; ++t) {
        coord = std::uniform_real_distribution<double>(0.3 * span, 0.7 * span)(rng);
        found = true;
        for (double u : used)
          if (std::abs(u - coord) < 2.0) found = false;
      }
      if (!found) continue;
      used.push_back(coord);
      double gap_w = std::uniform_real_distribution<double>(1.4, 2.2)(rng);
      double gap_c = std::uniform_real_distribution<double>(0.25 * cross, 0.75 * cross)(rng);
      double g0 = std::max(0.0, gap_c - gap_w / 2), g1 = std::min(cross, gap_c + gap_w / 2);
      if (vertical) {
        if (g0 > 0.3) scene.walls.push_back({{coord, 0}, {coord, g0}});
        if (g1 < cross - 0.3) scene.walls.push_back({{coord, g1}, {coord, cross}});
      } else {
        if (g0 > 0.3) scene.walls.push_back({{0, coord}, {g0, coord}});
        if (g1 < cross - 0.3) scene.walls.push_back({{g1, coord}, {cross, coord}});
      }
    }

    // Ambiguity plan: pairs share a category and differ in color.
    int need = static_cast<int>(std::ceil(params.ambiguity_fraction * params.objects));
    int npairs = (need + 1) / 2;
    if (2 * npairs > params.objects) npairs = params.objects / 2;
    int nobj = params.objects;
    std::vector<ObjectPlan> plans(nobj);
    std::uniform_int_distribution<int> cat(kFirstObjectCategory, params.num_categories - 1);
    std::uniform_int_distribution<int> col(0, kAttrColors - 1);
    std::uniform_int_distribution<int> mat(0, kAttrMaterials - 1);
    std::uniform_int_distribution<int> shp(0, kAttrShapes - 1);
    for (int i = 0; i < npairs; ++i) {
      ObjectPlan a, b;
      a.category = b.category = cat(rng);
      a.color = col(rng);
      b.color = (a.color + 1 + std::uniform_int_distribution<int>(0, kAttrColors - 2)(rng)) %
                kAttrColors;
      a.material = b.material = mat(rng);
      a.shape = b.shape = shp(rng);
      a.partner = 2 * i + 1;
      b.partner = 2 * i;
      plans[2 * i] = a;
      plans[2 * i + 1] = b;
    }
    for (int i = 2 * npairs; i < nobj; ++i) {
      plans[i].category = cat(rng);
      plans[i].color = col(rng);
      plans[i].material = mat(rng);
      plans[i].shape = shp(rng);
    }

    bool ok = true;
    std::uniform_real_distribution<double> px(scene.bounds.xmin, scene.bounds.xmax);
    std::uniform_real_distribution<double> py(scene.bounds.ymin, scene.bounds.ymax);
    std::uniform_real_distribution<float> noise(0.0f, 0.3f);
    for (int i = 0; i < nobj && ok; ++i) {
      Footprint fp = random_footprint(rng);
      bool placed_i = false;
      for (int t = 0; t < 300; ++t) {
        Vec2 pos;
        if (plans[i].partner >= 0 && plans[i].partner < i) {
          // Place near the already-placed mate.
          const Vec2& mate = scene.objects[plans[i].partner].center;
          double ang = std::uniform_real_distribution<double>(0, 2 * kPi)(rng);
          double dist = std::uniform_real_distribution<double>(kPairMin, kPairMax - 0.3)(rng);
          pos = mate + Vec2{std::cos(ang), std::sin(ang)} * dist;
        } else {
          pos = {px(rng), py(rng)};
        }
        if (placement_ok(scene, scene.objects, plans, pos, fp, plans[i], i)) {
          SceneObject o;
          o.center = pos;
          o.footprint = fp;
          o.category_id = plans[i].category;
          o.attributes =
              make_attributes(plans[i].color, plans[i].material, plans[i].shape, noise(rng));
          scene.objects.push_back(std::move(o));
          placed_i = true;
          break;
        }
      }
      if (!placed_i) ok = false;
    }
    if (!ok) continue;

    build_occupancy(scene);

    // The main component must dominate so start/goal sampling has room.
    long free_cells = 0, main_cells = 0;
    for (size_t i = 0; i < scene.grid.blocked.size(); ++i) {
      if (!scene.grid.blocked[i]) ++free_cells;
      if (scene.grid.component[i]) ++main_cells;
    }
    if (free_cells == 0 || static_cast<double>(main_cells) / free_cells < 0.6) continue;

    // Verify the ambiguity contract by exhaustive pair scan.
    int members = 0;
    for (size_t i = 0; i < scene.objects.size(); ++i) {
      bool has_partner = false;
      for (size_t j = 0; j < scene.objects.size(); ++j) {
        if (i == j) continue;
        if (scene.objects[i].category_id != scene.objects[j].category_id) continue;
        if ((scene.objects[i].center - scene.objects[j].center).norm() <= kPairMax) {
          if (scene.objects[i].attributes != scene.objects[j].attributes) has_partner = true;
        }
      }
      if (has_partner) ++members;
    }
    if (members < need) continue;
    if (params.ambiguity_fraction <= 0.0 && members > 0) continue;

    return scene;
  }
  throw GenerationError("generate_scene: no feasible packing after bounded retries");
}

bool line_clear(const Scene& scene, const Vec2& a, const Vec2& b) {
  double len = (b - a).norm();
  int steps = std::max(1, static_cast<int>(std::ceil(len / 0.02)));
  for (int i = 0; i <= steps; ++i) {
    Vec2 p = a + (b - a) * (static_cast<double>(i) / steps);
    if (!scene.grid.is_free(p)) return false;
  }
  return true;
}

namespace {

Polyline smooth_path(const Scene& scene, const std::vector<Vec2>& raw) {
  Polyline out;
  if (raw.empty()) return out;
  out.pts.push_back(raw.front());
  size_t i = 0;
  while (i + 1 < raw.size()) {
    size_t best = i + 1;
    for (size_t j = raw.size() - 1; j > i; --j) {
      if (line_clear(scene, raw[i], raw[j])) {
        best = j;
        break;
      }
    }
    out.pts.push_back(raw[best]);
    i = best;
  }
  return out;
}

}  // namespace

Episode sample_episode(const Scene& scene, uint64_t seed, const EpisodeGenParams& params,
                       const Vocab& vocab, int index) {
  const OccupancyGrid& g = scene.grid;
  std::vector<long> main_cells;
  for (long i = 0; i < static_cast<long>(g.component.size()); ++i)
    if (g.component[i]) main_cells.push_back(i);
  if (main_cells.size() < 2)
    throw GenerationError("sample_episode: scene has no usable free space");

  for (int attempt = 0; attempt < params.max_attempts; ++attempt) {
    Rng rng(make_rng(derive_seed(seed, "episode", static_cast<uint64_t>(attempt))));
    std::uniform_int_distribution<size_t> pick(0, main_cells.size() - 1);
    long si = main_cells[pick(rng)];
    long gi = main_cells[pick(rng)];
    if (si == gi) continue;
    Vec2 start = g.center(static_cast<int>(si % g.nx), static_cast<int>(si / g.nx));
    Vec2 goal = g.center(static_cast<int>(gi % g.nx), static_cast<int>(gi / g.nx));

    GeodesicField field = geodesic_field(scene, goal);
    double d = field.at(start);
    if (!std::isfinite(d) || d < params.min_len || d > params.max_len) continue;

    std::vector<Vec2> raw = grid_shortest_path(scene, field, start);
    if (raw.size() < 2) continue;
    Polyline path = smooth_path(scene, raw);
    if (path.pts.size() < 2) continue;

    // Landmarks: objects close to the path, ordered by arc length, with the
    // final one serving as the stop reference.
    struct Cand {
      double arc;
      const SceneObject* obj;
    };
    std::vector<Cand> cands;
    for (const auto& o : scene.objects)
      if (path.distance(o.center) <= params.landmark_radius)
        cands.push_back({path.nearest_arc(o.center), &o});
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
      return a.arc < b.arc;
    });
    if (static_cast<int>(cands.size()) < params.min_landmarks) continue;
    std::vector<const SceneObject*> landmarks;
    if (static_cast<int>(cands.size()) <= params.max_landmarks) {
      for (const auto& c : cands) landmarks.push_back(c.obj);
    } else {
      int n = static_cast<int>(cands.size());
      for (int k = 0; k < params.max_landmarks; ++k) {
        int idx = static_cast<int>(
            std::llround(static_cast<double>(k) * (n - 1) / (params.max_landmarks - 1)));
        landmarks.push_back(cands[idx].obj);
      }
    }

    const auto& names =
        scene.num_categories == 27 ? mp3d_category_names() : default_category_names();
    std::string text;
    for (size_t k = 0; k + 1 < landmarks.size(); ++k) {
      if (k > 0) text += " then ";
      text += "go past the " + attribute_word(landmarks[k]->attributes) + " " +
              names.at(landmarks[k]->category_id);
    }
    text += " and stop near the " + attribute_word(landmarks.back()->attributes) + " " +
            names.at(landmarks.back()->category_id);

    Episode e;
    e.episode_id = scene.id + ":" + std::to_string(index);
    e.scene_id = scene.id;
    Vec2 dir = (path.pts[1] - path.pts[0]).normalized();
    double jitter = std::uniform_real_distribution<double>(-kPi / 6, kPi / 6)(rng);
    e.start.x = start.x;
    e.start.y = start.y;
    e.start.theta = normalize_angle(std::atan2(dir.y, dir.x) + jitter);
    e.goal = goal;
    e.path = std::move(path);
    e.instruction_text = text;
    e.instruction_tokens = vocab.encode(text);
    return e;
  }
  throw GenerationError("sample_episode: no valid start/goal after bounded retries");
}

std::vector<Episode> sample_episodes(const Scene& scene, uint64_t seed,
                                     const EpisodeGenParams& params, const Vocab& vocab,
                                     int count) {
  std::vector<Episode> out;
  for (int i = 0; i < count; ++i)
    out.push_back(
        sample_episode(scene, derive_seed(seed, "episode-set", static_cast<uint64_t>(i)),
                       params, vocab, i));
  return out;
}

}  // namespace mgmap::world

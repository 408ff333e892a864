#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "mgmap/core/errors.hpp"
#include "mgmap/world/generate.hpp"
#include "mgmap/world/geodesic.hpp"

using namespace mgmap;
using namespace mgmap::world;

namespace {

Scene empty_room(double w, double h) {
  Scene s;
  s.id = "room";
  s.bounds = {0, 0, w, h};
  s.walls = {{{0, 0}, {w, 0}}, {{w, 0}, {w, h}}, {{w, h}, {0, h}}, {{0, h}, {0, 0}}};
  build_occupancy(s);
  return s;
}

}  // namespace

TEST_CASE("scene generation is deterministic in the seed") {
  WorldGenParams p;
  Scene a = generate_scene(7, p);
  Scene b = generate_scene(7, p);
  CHECK(scene_to_json(a) == scene_to_json(b));
  Scene c = generate_scene(8, p);
  CHECK(scene_to_json(a) != scene_to_json(c));
}

TEST_CASE("ambiguity fraction zero forbids same-category pairs within 4 m") {
  WorldGenParams p;
  p.ambiguity_fraction = 0.0;
  for (uint64_t seed : {1ull, 2ull, 3ull}) {
    Scene s = generate_scene(seed, p);
    for (size_t i = 0; i < s.objects.size(); ++i)
      for (size_t j = i + 1; j < s.objects.size(); ++j) {
        if (s.objects[i].category_id != s.objects[j].category_id) continue;
        CHECK((s.objects[i].center - s.objects[j].center).norm() > 4.0);
      }
  }
}

TEST_CASE("ambiguity fraction yields enough partnered objects (brute-force scan)") {
  WorldGenParams p;
  p.objects = 12;
  p.ambiguity_fraction = 0.33;  // ceil(0.33*12) = 4
  for (uint64_t seed : {11ull, 12ull, 13ull}) {
    Scene s = generate_scene(seed, p);
    int members = 0;
    for (size_t i = 0; i < s.objects.size(); ++i) {
      bool partnered = false;
      for (size_t j = 0; j < s.objects.size(); ++j) {
        if (i == j || s.objects[i].category_id != s.objects[j].category_id) continue;
        if ((s.objects[i].center - s.objects[j].center).norm() <= 4.0 &&
            s.objects[i].attributes != s.objects[j].attributes)
          partnered = true;
      }
      if (partnered) ++members;
    }
    CHECK(members >= 4);
  }
}

TEST_CASE("geodesic field straight line, source cell, disconnected") {
  Scene s = empty_room(10, 10);
  GeodesicField f = geodesic_field(s, {5, 5});
  CHECK(f.at({5, 5}) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(f.at({8, 5}) == doctest::Approx(3.0).epsilon(0.05 / 3.0));

  // Full dividing wall with no opening.
  Scene blocked = empty_room(10, 10);
  blocked.walls.push_back({{5.0, 0.0}, {5.0, 10.0}});
  build_occupancy(blocked);
  GeodesicField f2 = geodesic_field(blocked, {2.5, 5});
  CHECK(std::isfinite(f2.at({2.0, 5.0})));
  CHECK(!std::isfinite(f2.at({7.5, 5.0})));

  CHECK_THROWS_AS(geodesic_field(empty_room(10, 10), Vec2{-1.0, -1.0}), DomainError);
}

TEST_CASE("geodesic triangle property on sampled triples") {
  Scene s = generate_scene(21, WorldGenParams{});
  Rng rng(make_rng(5));
  const auto& g = s.grid;
  std::vector<Vec2> free_pts;
  for (int iy = 0; iy < g.ny && free_pts.size() < 4000; iy += 3)
    for (int ix = 0; ix < g.nx; ix += 3)
      if (g.component[g.index(ix, iy)]) free_pts.push_back(g.center(ix, iy));
  REQUIRE(free_pts.size() > 10);
  std::uniform_int_distribution<size_t> pick(0, free_pts.size() - 1);
  for (int rep = 0; rep < 12; ++rep) {
    Vec2 src = free_pts[pick(rng)], a = free_pts[pick(rng)], b = free_pts[pick(rng)];
    GeodesicField fs = geodesic_field(s, src);
    GeodesicField fa = geodesic_field(s, a);
    double lhs = std::abs(fs.at(a) - fs.at(b));
    CHECK(lhs <= fa.at(b) + 2 * kGridCell + 1e-9);
  }
}

TEST_CASE("episode sampling: determinism and invariants") {
  Scene s = generate_scene(31, WorldGenParams{});
  Vocab vocab;
  EpisodeGenParams p;
  Episode a = sample_episode(s, 99, p, vocab, 0);
  Episode b = sample_episode(s, 99, p, vocab, 0);
  CHECK(episode_to_json_line(a) == episode_to_json_line(b));

  GeodesicField goal_field = geodesic_field(s, a.goal);
  double d = goal_field.at(a.start.position());
  CHECK(d > 3.0);  // exceeds the success threshold
  CHECK(d >= p.min_len - 0.2);
  CHECK(d <= p.max_len + 0.2);

  // Path endpoints match start/goal; consecutive points have line of sight.
  CHECK((a.path.pts.front() - a.start.position()).norm() < 1e-9);
  CHECK((a.path.pts.back() - a.goal).norm() < 1e-9);
  for (size_t i = 1; i < a.path.pts.size(); ++i)
    CHECK(line_clear(s, a.path.pts[i - 1], a.path.pts[i]));

  // Path avoids obstacle interiors (1 cm sampling).
  double total = a.path.length();
  for (double arc = 0; arc <= total; arc += 0.01)
    CHECK_FALSE(s.inside_obstacle(a.path.at_arc(arc)));
}

TEST_CASE("instruction landmarks lie within 1.5 m of the path (1 mm sampling)") {
  Scene s = generate_scene(41, WorldGenParams{});
  Vocab vocab;
  EpisodeGenParams p;
  for (int k = 0; k < 3; ++k) {
    Episode e = sample_episode(s, 500 + k, p, vocab, k);
    // Parse landmark mentions back out of the instruction.
    const auto& names = default_category_names();
    std::vector<const SceneObject*> mentioned;
    std::istringstream in(e.instruction_text);
    std::string tok, attr;
    std::string prev;
    while (in >> tok) {
      for (size_t ci = kFirstObjectCategory; ci < names.size(); ++ci) {
        if (tok == names[ci]) {
          // prev word is the attribute (color) word
          const SceneObject* best = nullptr;
          double best_d = 1e18;
          for (const auto& o : s.objects) {
            if (o.category_id != static_cast<int>(ci)) continue;
            if (attribute_word(o.attributes) != prev) continue;
            double d = e.path.distance(o.center);
            if (d < best_d) {
              best_d = d;
              best = &o;
            }
          }
          REQUIRE(best != nullptr);
          mentioned.push_back(best);
        }
      }
      prev = tok;
    }
    CHECK(mentioned.size() >= 2);
    CHECK(mentioned.size() <= 4);
    for (const auto* o : mentioned) {
      double dmin = 1e18;
      double total = e.path.length();
      for (double arc = 0; arc <= total; arc += 0.001)
        dmin = std::min(dmin, (e.path.at_arc(arc) - o->center).norm());
      CHECK(dmin <= 1.5 + 1e-6);
    }
  }
}

TEST_CASE("episode dataset round trip and error reporting") {
  Scene s = generate_scene(51, WorldGenParams{});
  Vocab vocab;
  std::vector<Episode> eps;
  for (int i = 0; i < 100; ++i)
    eps.push_back(sample_episode(s, 1000 + i, EpisodeGenParams{}, vocab, i));
  const std::string path = "test_eps.jsonl";
  write_episodes(path, eps);
  auto back = read_episodes(path);
  REQUIRE(back.size() == eps.size());
  for (size_t i = 0; i < eps.size(); ++i)
    CHECK(episode_to_json_line(back[i]) == episode_to_json_line(eps[i]));

  // Truncated line: the error names the line.
  {
    std::ofstream out(path, std::ios::app);
    out << "{\"format\": \"mgmap.episode.v1\", \"episode_id\"\n";
  }
  try {
    read_episodes(path);
    CHECK(false);
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 101") != std::string::npos);
  }

  // Unknown format version rejected.
  {
    std::ofstream out(path);
    std::string line = episode_to_json_line(eps[0]);
    auto pos = line.find("mgmap.episode.v1");
    line.replace(pos, std::string("mgmap.episode.v1").size(), "v9");
    out << line << "\n";
  }
  CHECK_THROWS_AS(read_episodes(path), DataError);
  std::remove(path.c_str());
}

TEST_CASE("scene json round trip and version gate") {
  Scene s = generate_scene(61, WorldGenParams{});
  std::string text = scene_to_json(s);
  Scene back = scene_from_json(text);
  CHECK(scene_to_json(back) == text);

  std::string bad = text;
  auto pos = bad.find("mgmap.scene.v1");
  bad.replace(pos, std::string("mgmap.scene.v1").size(), "v9");
  CHECK_THROWS_AS(scene_from_json(bad), DataError);
}

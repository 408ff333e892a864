#include "mgmap/world/scene.hpp"

#include <deque>
#include <fstream>

#include <json.hpp>

#include "mgmap/core/errors.hpp"

namespace mgmap::world {

using nlohmann::json;

const std::vector<std::string>& default_category_names() {
  static const std::vector<std::string> names = {"wall",  "floor", "chair", "table",
                                                 "sofa",  "bed",   "plant", "cabinet"};
  return names;
}

const std::vector<std::string>& mp3d_category_names() {
  static const std::vector<std::string> names = {
      "void",        "chair",    "door",   "table",     "cushion",       "sofa",
      "bed",         "plant",    "sink",   "toilet",    "tv-monitor",    "shower",
      "bathtub",     "counter",  "appliances", "structure", "other",     "free-space",
      "picture",     "cabinet",  "chest-of-drawers", "stool", "towel",   "fireplace",
      "gym-equipment", "seating", "clothes"};
  return names;
}

void build_occupancy(Scene& scene) {
  OccupancyGrid g;
  g.x0 = scene.bounds.xmin;
  g.y0 = scene.bounds.ymin;
  g.nx = static_cast<int>(std::ceil(scene.bounds.width() / kGridCell));
  g.ny = static_cast<int>(std::ceil(scene.bounds.height() / kGridCell));
  g.blocked.assign(static_cast<long>(g.nx) * g.ny, 0);
  g.component.assign(static_cast<long>(g.nx) * g.ny, 0);

  const double clear = scene.clearance;
  for (int iy = 0; iy < g.ny; ++iy) {
    for (int ix = 0; ix < g.nx; ++ix) {
      Vec2 c = g.center(ix, iy);
      bool hit = false;
      for (const auto& w : scene.walls) {
        if (point_segment_distance(c, w) <= clear) {
          hit = true;
          break;
        }
      }
      if (!hit) {
        for (const auto& o : scene.objects) {
          if (o.footprint.distance(c, o.center) <= clear) {
            hit = true;
            break;
          }
        }
      }
      if (hit) g.blocked[g.index(ix, iy)] = 1;
    }
  }

  // Flood-fill free components (8-connected); keep the largest.
  std::vector<int> comp(static_cast<long>(g.nx) * g.ny, -1);
  int ncomp = 0;
  long best_size = 0;
  int best = -1;
  for (int iy = 0; iy < g.ny; ++iy) {
    for (int ix = 0; ix < g.nx; ++ix) {
      long i0 = g.index(ix, iy);
      if (g.blocked[i0] || comp[i0] >= 0) continue;
      long size = 0;
      std::deque<std::pair<int, int>> q{{ix, iy}};
      comp[i0] = ncomp;
      while (!q.empty()) {
        auto [cx, cy] = q.front();
        q.pop_front();
        ++size;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            int nx2 = cx + dx, ny2 = cy + dy;
            if (!g.in_range(nx2, ny2)) continue;
            long ni = g.index(nx2, ny2);
            if (g.blocked[ni] || comp[ni] >= 0) continue;
            comp[ni] = ncomp;
            q.push_back({nx2, ny2});
          }
      }
      if (size > best_size) {
        best_size = size;
        best = ncomp;
      }
      ++ncomp;
    }
  }
  for (long i = 0; i < static_cast<long>(comp.size()); ++i)
    g.component[i] = (comp[i] == best) ? 1 : 0;

  scene.grid = std::move(g);
}

namespace {

json footprint_to_json(const Footprint& f) {
  if (f.kind == Footprint::Kind::Disc) return json{{"type", "disc"}, {"radius", f.radius}};
  return json{{"type", "rect"}, {"hw", f.hw}, {"hh", f.hh}};
}

Footprint footprint_from_json(const json& j) {
  Footprint f;
  std::string type = j.at("type").get<std::string>();
  if (type == "disc") {
    f.kind = Footprint::Kind::Disc;
    f.radius = j.at("radius").get<double>();
  } else if (type == "rect") {
    f.kind = Footprint::Kind::Rect;
    f.hw = j.at("hw").get<double>();
    f.hh = j.at("hh").get<double>();
  } else {
    throw DataError("unknown footprint type: " + type);
  }
  return f;
}

}  // namespace

std::string scene_to_json(const Scene& scene) {
  json j;
  j["format"] = "mgmap.scene.v1";
  j["id"] = scene.id;
  j["bounds"] = {scene.bounds.xmin, scene.bounds.ymin, scene.bounds.xmax, scene.bounds.ymax};
  j["categories"] = scene.num_categories;
  j["clearance"] = scene.clearance;
  json walls = json::array();
  for (const auto& w : scene.walls) walls.push_back({w.a.x, w.a.y, w.b.x, w.b.y});
  j["walls"] = walls;
  json objects = json::array();
  for (const auto& o : scene.objects) {
    json jo;
    jo["center"] = {o.center.x, o.center.y};
    jo["footprint"] = footprint_to_json(o.footprint);
    jo["category_id"] = o.category_id;
    jo["attributes"] = o.attributes;
    objects.push_back(jo);
  }
  j["objects"] = objects;
  return j.dump(2);
}

Scene scene_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("scene parse error: ") + e.what());
  }
  try {
    std::string format = j.at("format").get<std::string>();
    if (format != "mgmap.scene.v1") throw DataError("unsupported scene format: " + format);
    Scene s;
    s.id = j.at("id").get<std::string>();
    auto b = j.at("bounds");
    s.bounds = {b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(),
                b.at(3).get<double>()};
    s.num_categories = j.value("categories", 8);
    s.clearance = j.value("clearance", 0.10);
    for (const auto& w : j.at("walls"))
      s.walls.push_back({{w.at(0).get<double>(), w.at(1).get<double>()},
                         {w.at(2).get<double>(), w.at(3).get<double>()}});
    for (const auto& jo : j.at("objects")) {
      SceneObject o;
      o.center = {jo.at("center").at(0).get<double>(), jo.at("center").at(1).get<double>()};
      o.footprint = footprint_from_json(jo.at("footprint"));
      o.category_id = jo.at("category_id").get<int>();
      if (o.category_id < 0 || o.category_id >= s.num_categories)
        throw DataError("object category_id out of range");
      o.attributes = jo.at("attributes").get<std::vector<float>>();
      s.objects.push_back(std::move(o));
    }
    build_occupancy(s);
    return s;
  } catch (const json::exception& e) {
    throw DataError(std::string("scene schema error: ") + e.what());
  }
}

void write_scene(const std::string& path, const Scene& scene) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << scene_to_json(scene) << "\n";
  if (!out) throw DataError("write failed: " + path);
}

Scene read_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open scene file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return scene_from_json(text);
}

}  // namespace mgmap::world

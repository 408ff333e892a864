#include "mgmap/world/episode.hpp"

#include <fstream>

#include <json.hpp>

#include "mgmap/core/errors.hpp"

namespace mgmap::world {

using nlohmann::json;

std::string episode_to_json_line(const Episode& e) {
  json j;
  j["format"] = "mgmap.episode.v1";
  j["episode_id"] = e.episode_id;
  j["scene_id"] = e.scene_id;
  j["start"] = {{"x", e.start.x}, {"y", e.start.y}, {"theta", e.start.theta}};
  j["goal"] = {e.goal.x, e.goal.y};
  json path = json::array();
  for (const auto& p : e.path.pts) path.push_back({p.x, p.y});
  j["path"] = path;
  j["instruction_tokens"] = e.instruction_tokens;
  j["instruction_text"] = e.instruction_text;
  return j.dump();
}

Episode episode_from_json_line(const std::string& line, int lineno) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw DataError("episodes line " + std::to_string(lineno) + ": parse error: " + e.what());
  }
  try {
    std::string format = j.at("format").get<std::string>();
    if (format != "mgmap.episode.v1")
      throw DataError("episodes line " + std::to_string(lineno) +
                      ": unsupported format: " + format);
    Episode e;
    e.episode_id = j.at("episode_id").get<std::string>();
    e.scene_id = j.at("scene_id").get<std::string>();
    e.start.x = j.at("start").at("x").get<double>();
    e.start.y = j.at("start").at("y").get<double>();
    e.start.theta = j.at("start").at("theta").get<double>();
    e.goal = {j.at("goal").at(0).get<double>(), j.at("goal").at(1).get<double>()};
    for (const auto& p : j.at("path"))
      e.path.pts.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    e.instruction_tokens = j.at("instruction_tokens").get<std::vector<int>>();
    e.instruction_text = j.at("instruction_text").get<std::string>();
    return e;
  } catch (const json::exception& ex) {
    throw DataError("episodes line " + std::to_string(lineno) + ": schema error: " + ex.what());
  }
}

void write_episodes(const std::string& path, const std::vector<Episode>& episodes) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  for (const auto& e : episodes) out << episode_to_json_line(e) << "\n";
  if (!out) throw DataError("write failed: " + path);
}

std::vector<Episode> read_episodes(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open episodes file: " + path);
  std::vector<Episode> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    out.push_back(episode_from_json_line(line, lineno));
  }
  return out;
}

}  // namespace mgmap::world

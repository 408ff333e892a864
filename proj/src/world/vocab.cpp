#include "mgmap/world/vocab.hpp"

#include <sstream>

#include "mgmap/core/errors.hpp"
#include "mgmap/world/scene.hpp"

namespace mgmap::world {

const std::vector<std::string>& Vocab::color_words() {
  static const std::vector<std::string> w = {"red", "green", "blue"};
  return w;
}
const std::vector<std::string>& Vocab::material_words() {
  static const std::vector<std::string> w = {"wooden", "metal"};
  return w;
}
const std::vector<std::string>& Vocab::shape_words() {
  static const std::vector<std::string> w = {"round", "square"};
  return w;
}

Vocab::Vocab() {
  tokens_.push_back("<pad>");
  auto add = [&](const std::string& t) {
    if (!ids_.count(t)) {
      ids_[t] = static_cast<int>(tokens_.size());
      tokens_.push_back(t);
    }
  };
  for (const char* t : {"go", "past", "the", "then", "and", "stop", "near"}) add(t);
  for (const auto& t : color_words()) add(t);
  for (const auto& t : material_words()) add(t);
  for (const auto& t : shape_words()) add(t);
  for (const auto& t : default_category_names()) add(t);
  for (const auto& t : mp3d_category_names()) add(t);
  ids_["<pad>"] = 0;
}

int Vocab::id(const std::string& token) const {
  auto it = ids_.find(token);
  if (it == ids_.end()) throw DataError("unknown token: " + token);
  return it->second;
}

const std::string& Vocab::token(int id) const {
  if (id < 0 || id >= static_cast<int>(tokens_.size()))
    throw DataError("token id out of range: " + std::to_string(id));
  return tokens_[id];
}

std::vector<int> Vocab::encode(const std::string& text) const {
  std::istringstream in(text);
  std::vector<int> out;
  std::string tok;
  while (in >> tok) out.push_back(id(tok));
  return out;
}

std::string Vocab::decode(const std::vector<int>& ids) const {
  std::string out;
  for (size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ' ';
    out += token(ids[i]);
  }
  return out;
}

std::vector<float> make_attributes(int color, int material, int shape, float noise) {
  std::vector<float> a(kAttrDim, 0.0f);
  a[color] = 1.0f;
  a[kAttrColors + material] = 1.0f;
  a[kAttrColors + kAttrMaterials + shape] = 1.0f;
  a[kWallFlagDim] = noise;
  return a;
}

std::vector<float> wall_attributes() {
  std::vector<float> a(kAttrDim, 0.0f);
  a[kWallFlagDim] = 1.0f;
  return a;
}

std::string attribute_word(const std::vector<float>& attrs) {
  int best = 0;
  for (int i = 1; i < kAttrColors; ++i)
    if (attrs[i] > attrs[best]) best = i;
  return Vocab::color_words()[best];
}

}  // namespace mgmap::world

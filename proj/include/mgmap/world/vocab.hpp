#pragma once

#include <map>
#include <string>
#include <vector>

namespace mgmap::world {

// Fixed template grammar: id 0 is padding; the remaining ids cover the verbs,
// connectives, attribute words and category words the instruction templates
// draw from. The mapping is bijective and identical across runs.
class Vocab {
 public:
  Vocab();  // built from the fixed grammar + default category names

  int id(const std::string& token) const;          // throws on unknown token
  const std::string& token(int id) const;          // throws on bad id
  int size() const { return static_cast<int>(tokens_.size()); }

  std::vector<int> encode(const std::string& text) const;   // whitespace split
  std::string decode(const std::vector<int>& ids) const;

  static const std::vector<std::string>& color_words();     // one-hot dims 0..2
  static const std::vector<std::string>& material_words();  // one-hot dims 3..4
  static const std::vector<std::string>& shape_words();     // one-hot dims 5..6

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, int> ids_;
};

// Attribute-vector layout (F = 8): colors 0..2, materials 3..4, shapes 5..6,
// dim 7 is a wall flag (1 on the reserved wall feature, noise on objects).
constexpr int kAttrColors = 3;
constexpr int kAttrMaterials = 2;
constexpr int kAttrShapes = 2;
constexpr int kAttrDim = 8;
constexpr int kWallFlagDim = 7;

std::vector<float> make_attributes(int color, int material, int shape, float noise);
std::vector<float> wall_attributes();

// Word describing the object's dominant color / material / shape.
std::string attribute_word(const std::vector<float>& attrs);

}  // namespace mgmap::world

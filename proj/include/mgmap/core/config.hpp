#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace mgmap {

// Flat dotted-key configuration. Every key has a registered default and a
// one-line doc string; unknown keys are rejected on load/set. The fully
// resolved table is echoed into reports and checkpoints for provenance.
class Config {
 public:
  struct Entry {
    std::string def;
    std::string doc;
  };

  Config();  // all defaults

  static const std::map<std::string, Entry>& registry();

  void set(const std::string& key, const std::string& value);
  void load_file(const std::string& path);

  bool has(const std::string& key) const;
  const std::string& raw(const std::string& key) const;

  int geti(const std::string& key) const;
  long getl(const std::string& key) const;
  double getf(const std::string& key) const;
  bool getb(const std::string& key) const;
  const std::string& gets(const std::string& key) const;

  // Sorted "key = value" lines of the fully resolved config.
  std::string serialized() const;

  // Hash over the architecture-defining sections (model.*, map.*, sim.n_rays)
  // used to guard checkpoint loads.
  uint64_t arch_hash() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace mgmap

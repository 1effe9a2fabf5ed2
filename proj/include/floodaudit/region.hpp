#pragma once

// Region model shared by every stage: an ordered set of polygon features.
// Iteration order is frozen at parse time and defines the index used by
// all weight matrices and attribute vectors.

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "floodaudit/error.hpp"
#include "floodaudit/geometry.hpp"

namespace floodaudit {

enum class Level { tract, block_group, custom };

inline const char* to_string(Level level) {
  switch (level) {
    case Level::tract: return "tract";
    case Level::block_group: return "block_group";
    default: return "custom";
  }
}

inline std::optional<Level> level_from_string(const std::string& s) {
  if (s == "tract") return Level::tract;
  if (s == "block_group") return Level::block_group;
  if (s == "custom") return Level::custom;
  return std::nullopt;
}

struct Region {
  std::string id;
  MultiPolygon geometry;
  double area = 0.0;
  // area collapsed to zero; never usable as a disaggregation weight
  bool degenerate = false;
};

class RegionSet {
 public:
  RegionSet() = default;
  explicit RegionSet(Level level) : level_(level) {}

  // feature: original GeoJSON feature, kept verbatim for re-emission;
  // pass a null json for synthetic region sets
  void add(Region region, nlohmann::json feature = nullptr) {
    if (index_.contains(region.id)) {
      throw DataError("duplicate region id: " + region.id);
    }
    index_.emplace(region.id, regions_.size());
    regions_.push_back(std::move(region));
    features_.push_back(std::move(feature));
  }

  std::size_t size() const { return regions_.size(); }
  bool empty() const { return regions_.empty(); }
  Level level() const { return level_; }
  void set_level(Level level) { level_ = level; }

  const Region& operator[](std::size_t i) const { return regions_[i]; }
  const std::vector<Region>& regions() const { return regions_; }

  std::optional<std::size_t> index_of(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  bool contains(const std::string& id) const { return index_.contains(id); }

  // original feature json for region i; null for synthetic sets
  const nlohmann::json& feature(std::size_t i) const { return features_[i]; }

  std::vector<std::string> ids() const {
    std::vector<std::string> out;
    out.reserve(regions_.size());
    for (const Region& r : regions_) out.push_back(r.id);
    return out;
  }

  std::vector<double> areas() const {
    std::vector<double> out;
    out.reserve(regions_.size());
    for (const Region& r : regions_) out.push_back(r.area);
    return out;
  }

 private:
  std::vector<Region> regions_;
  std::vector<nlohmann::json> features_;
  std::unordered_map<std::string, std::size_t> index_;
  Level level_ = Level::custom;
};

}  // namespace floodaudit

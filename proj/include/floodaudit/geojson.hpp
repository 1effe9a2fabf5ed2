#pragma once

// GeoJSON (RFC 7946) FeatureCollection ingestion and emission.
// Feature ids come from a caller-named property (census GEOID by
// default). Original feature objects are retained so emitted layers
// keep geometry identical to the input.

#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "floodaudit/error.hpp"
#include "floodaudit/region.hpp"

namespace floodaudit {

namespace detail {

inline Ring parse_ring(const nlohmann::json& coords, const std::string& ctx) {
  if (!coords.is_array() || coords.size() < 4) {
    throw DataError(ctx + ": ring must have at least 4 coordinate pairs");
  }
  Ring ring;
  ring.reserve(coords.size());
  for (const auto& pt : coords) {
    if (!pt.is_array() || pt.size() < 2 || !pt[0].is_number() || !pt[1].is_number()) {
      throw DataError(ctx + ": coordinate is not a numeric pair");
    }
    ring.push_back(Point{pt[0].get<double>(), pt[1].get<double>()});
  }
  if (ring.front().x != ring.back().x || ring.front().y != ring.back().y) {
    throw DataError(ctx + ": ring is not closed (first point != last point)");
  }
  return ring;
}

inline Polygon parse_polygon(const nlohmann::json& coords, const std::string& ctx) {
  if (!coords.is_array() || coords.empty()) {
    throw DataError(ctx + ": polygon has no rings");
  }
  Polygon poly;
  poly.outer = parse_ring(coords[0], ctx);
  for (std::size_t i = 1; i < coords.size(); ++i) {
    poly.holes.push_back(parse_ring(coords[i], ctx));
  }
  return poly;
}

inline std::string id_to_string(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
  if (v.is_number_float()) return nlohmann::json(v.get<double>()).dump();
  throw DataError("id property is neither string nor number");
}

inline nlohmann::json geometry_to_json(const MultiPolygon& mp) {
  auto ring_json = [](const Ring& r) {
    nlohmann::json arr = nlohmann::json::array();
    for (const Point& p : r) arr.push_back(nlohmann::json::array({p.x, p.y}));
    return arr;
  };
  auto poly_json = [&](const Polygon& p) {
    nlohmann::json arr = nlohmann::json::array();
    arr.push_back(ring_json(p.outer));
    for (const Ring& h : p.holes) arr.push_back(ring_json(h));
    return arr;
  };
  if (mp.size() == 1) {
    return nlohmann::json{{"type", "Polygon"}, {"coordinates", poly_json(mp[0])}};
  }
  nlohmann::json coords = nlohmann::json::array();
  for (const Polygon& p : mp) coords.push_back(poly_json(p));
  return nlohmann::json{{"type", "MultiPolygon"}, {"coordinates", coords}};
}

}  // namespace detail

inline RegionSet parse_geometry(const nlohmann::json& doc, const std::string& id_property = "GEOID",
                                Level level = Level::custom,
                                const std::string& what = "geometry") {
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" ||
      !doc.contains("features") || !doc["features"].is_array()) {
    throw DataError(what + ": not a GeoJSON FeatureCollection");
  }
  RegionSet set(level);
  std::size_t n = 0;
  for (const auto& feature : doc["features"]) {
    std::string ctx = what + ": feature " + std::to_string(n++);
    if (!feature.is_object() || feature.value("type", "") != "Feature") {
      throw DataError(ctx + ": not a Feature object");
    }
    if (!feature.contains("properties") || !feature["properties"].is_object() ||
        !feature["properties"].contains(id_property) ||
        feature["properties"][id_property].is_null()) {
      throw DataError(ctx + ": missing id property '" + id_property + "'");
    }
    Region region;
    region.id = detail::id_to_string(feature["properties"][id_property]);
    ctx += " (" + region.id + ")";

    if (!feature.contains("geometry") || !feature["geometry"].is_object()) {
      throw DataError(ctx + ": missing geometry");
    }
    const auto& geom = feature["geometry"];
    std::string type = geom.value("type", "");
    if (!geom.contains("coordinates")) throw DataError(ctx + ": geometry has no coordinates");
    if (type == "Polygon") {
      region.geometry.push_back(detail::parse_polygon(geom["coordinates"], ctx));
    } else if (type == "MultiPolygon") {
      for (const auto& poly : geom["coordinates"]) {
        region.geometry.push_back(detail::parse_polygon(poly, ctx));
      }
      if (region.geometry.empty()) throw DataError(ctx + ": empty MultiPolygon");
    } else {
      throw DataError(ctx + ": geometry type '" + type + "' is not polygonal");
    }
    region.area = multipolygon_area(region.geometry);
    region.degenerate = region.area <= 0.0;
    set.add(std::move(region), feature);
  }
  return set;
}

inline RegionSet parse_geometry_file(const std::string& path,
                                     const std::string& id_property = "GEOID",
                                     Level level = Level::custom) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": malformed JSON: " + e.what());
  }
  return parse_geometry(doc, id_property, level, path);
}

// FeatureCollection for a region set. extra_properties[k] holds, for
// each region index, properties to merge into the feature (null values
// are skipped so absent statistics stay absent).
inline nlohmann::json to_feature_collection(
    const RegionSet& regions,
    const std::vector<std::pair<std::string, std::vector<nlohmann::json>>>& extra_properties = {},
    const std::string& id_property = "GEOID") {
  nlohmann::json features = nlohmann::json::array();
  for (std::size_t i = 0; i < regions.size(); ++i) {
    nlohmann::json feature = regions.feature(i);
    if (feature.is_null()) {
      feature = nlohmann::json{{"type", "Feature"},
                               {"properties", {{id_property, regions[i].id}}},
                               {"geometry", detail::geometry_to_json(regions[i].geometry)}};
    }
    for (const auto& [name, values] : extra_properties) {
      if (!values[i].is_null()) feature["properties"][name] = values[i];
    }
    features.push_back(std::move(feature));
  }
  return nlohmann::json{{"type", "FeatureCollection"}, {"features", std::move(features)}};
}

inline void write_geojson_file(const nlohmann::json& doc, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << doc.dump(2) << '\n';
}

}  // namespace floodaudit

#pragma once

// Data-shaping stages: min-max normalization, rate adjustment,
// category filtering, descriptive statistics, and area-weighted
// tract -> block-group disaggregation. All pure and stateless.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "floodaudit/attributes.hpp"
#include "floodaudit/csv.hpp"
#include "floodaudit/error.hpp"
#include "floodaudit/hierarchy.hpp"
#include "floodaudit/region.hpp"

namespace floodaudit {

// q_i = (x_i - min) / (max - min); order-preserving map onto [0,1]
inline std::vector<double> minmax_normalize(std::span<const double> column) {
  if (column.empty()) throw NumericError("minmax_normalize: empty column");
  double lo = column[0], hi = column[0];
  for (double v : column) {
    if (std::isnan(v)) throw NumericError("minmax_normalize: missing value in column");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!(hi > lo)) throw NumericError("minmax_normalize: degenerate range (max == min)");
  std::vector<double> out;
  out.reserve(column.size());
  for (double v : column) out.push_back((v - lo) / (hi - lo));
  return out;
}

enum class RateKind { per_housing_unit, per_road_length, custom };

inline const char* to_string(RateKind k) {
  switch (k) {
    case RateKind::per_housing_unit: return "per_housing_unit";
    case RateKind::per_road_length: return "per_road_length";
    default: return "custom";
  }
}

struct RateResult {
  std::vector<double> rates;
  // regions where count == 0 and denominator == 0 (rate forced to 0)
  std::vector<std::size_t> zero_zero_regions;
  RateKind kind = RateKind::custom;
};

inline RateResult rate_normalize(std::span<const double> counts,
                                 std::span<const double> denominators,
                                 RateKind kind = RateKind::custom,
                                 const std::vector<std::string>& region_ids = {}) {
  if (counts.size() != denominators.size()) {
    throw DataError("rate_normalize: counts and denominators differ in length");
  }
  RateResult res;
  res.kind = kind;
  res.rates.reserve(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (denominators[i] > 0.0) {
      res.rates.push_back(counts[i] / denominators[i]);
    } else if (counts[i] == 0.0) {
      res.rates.push_back(0.0);
      res.zero_zero_regions.push_back(i);
    } else {
      std::string where = i < region_ids.size() ? region_ids[i] : std::to_string(i);
      throw DataError("rate_normalize: region " + where + " has count " +
                      std::to_string(counts[i]) + " but zero denominator");
    }
  }
  return res;
}

// Split each parent value across its children proportionally to child
// area. The denominator is the sum of sibling areas (not the parent
// polygon area), so each parent's mass is conserved exactly.
inline std::vector<double> disaggregate_by_area(std::span<const double> parent_values,
                                                const Hierarchy& hierarchy,
                                                const RegionSet& children,
                                                const RegionSet& parents) {
  if (parent_values.size() != parents.size()) {
    throw DataError("disaggregate_by_area: value count does not match parent count");
  }
  std::vector<double> sibling_area(parents.size(), 0.0);
  for (std::size_t c = 0; c < children.size(); ++c) {
    sibling_area[hierarchy.parent_of[c]] += children[c].area;
  }
  for (std::size_t p = 0; p < parents.size(); ++p) {
    if (parent_values[p] > 0.0 && sibling_area[p] <= 0.0) {
      throw DataError("disaggregate_by_area: parent " + parents[p].id +
                      " has value > 0 but zero total child area");
    }
  }
  std::vector<double> out(children.size(), 0.0);
  for (std::size_t c = 0; c < children.size(); ++c) {
    std::size_t p = hierarchy.parent_of[c];
    if (parent_values[p] == 0.0) continue;
    out[c] = parent_values[p] * (children[c].area / sibling_area[p]);
  }
  return out;
}

// Category names are matched case-insensitively after trimming.
struct CategoryFilter {
  std::string label;
  std::vector<std::string> categories;
};

namespace detail {

inline std::string canonical_category(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  std::string out(s.substr(b, e - b));
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace detail

inline bool filter_matches(const CategoryFilter& filter, std::string_view category) {
  std::string canon = detail::canonical_category(category);
  for (const std::string& c : filter.categories) {
    if (detail::canonical_category(c) == canon) return true;
  }
  return false;
}

struct CategoryCounts {
  std::vector<double> counts;  // aligned with the region set
  std::size_t matched_total = 0;
  // rows whose category missed the filter, tallied by canonical name
  std::map<std::string, std::size_t> residual;
  // rows pointing at region ids absent from the region set
  std::map<std::string, std::size_t> unknown_regions;
};

inline CategoryCounts apply_category_filter(const std::vector<ReportRow>& reports,
                                            const CategoryFilter& filter,
                                            const RegionSet& regions) {
  if (filter.categories.empty()) throw ConfigError("category filter '" + filter.label +
                                                   "' has no categories");
  CategoryCounts out;
  out.counts.assign(regions.size(), 0.0);
  for (const ReportRow& row : reports) {
    if (!filter_matches(filter, row.category)) {
      ++out.residual[detail::canonical_category(row.category)];
      continue;
    }
    auto idx = regions.index_of(row.region_id);
    if (!idx) {
      ++out.unknown_regions[row.region_id];
      continue;
    }
    out.counts[*idx] += 1.0;
    ++out.matched_total;
  }
  return out;
}

struct ColumnStats {
  std::string name;
  double minimum = 0.0;
  double maximum = 0.0;
  double mean = 0.0;
  double stddev = 0.0;  // population formula
  std::size_t count = 0;
};

using DescriptiveStats = std::vector<ColumnStats>;

inline ColumnStats column_stats(const std::string& name, std::span<const double> values) {
  if (values.empty()) throw DataError("descriptive stats: column '" + name + "' is empty");
  ColumnStats s;
  s.name = name;
  s.count = values.size();
  s.minimum = values[0];
  s.maximum = values[0];
  double sum = 0.0;
  for (double v : values) {
    s.minimum = std::min(s.minimum, v);
    s.maximum = std::max(s.maximum, v);
    sum += v;
  }
  s.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(sq / static_cast<double>(values.size()));
  return s;
}

// One stats row per column, input order preserved (Tables 1-2 shape).
inline DescriptiveStats descriptive_stats(const AttributeTable& table) {
  DescriptiveStats out;
  for (const std::string& name : table.column_names()) {
    out.push_back(column_stats(name, table.dense(name)));
  }
  return out;
}

}  // namespace floodaudit

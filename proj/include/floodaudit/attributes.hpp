#pragma once

// Attribute table keyed by region id. Missing values stay explicit:
// any statistic that touches a missing cell fails with the offending
// rows named, rather than imputing.

#include <cstddef>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "floodaudit/error.hpp"
#include "floodaudit/region.hpp"

namespace floodaudit {

struct Column {
  std::vector<double> values;
  std::vector<std::uint8_t> missing;  // 1 = value absent

  std::size_t missing_count() const {
    std::size_t c = 0;
    for (auto m : missing) c += m;
    return c;
  }
};

class AttributeTable {
 public:
  AttributeTable() = default;
  explicit AttributeTable(std::vector<std::string> ids) : ids_(std::move(ids)) {}

  const std::vector<std::string>& ids() const { return ids_; }
  std::size_t rows() const { return ids_.size(); }

  const std::vector<std::string>& column_names() const { return order_; }
  bool has_column(const std::string& name) const { return columns_.contains(name); }

  void add_column(const std::string& name, std::vector<double> values,
                  std::vector<std::uint8_t> missing = {}) {
    if (values.size() != ids_.size()) {
      throw DataError("column '" + name + "' has " + std::to_string(values.size()) +
                      " rows, table has " + std::to_string(ids_.size()));
    }
    if (missing.empty()) missing.assign(values.size(), 0);
    if (columns_.contains(name)) {
      throw DataError("duplicate column: " + name);
    }
    order_.push_back(name);
    columns_.emplace(name, Column{std::move(values), std::move(missing)});
  }

  const Column& column(const std::string& name) const {
    auto it = columns_.find(name);
    if (it == columns_.end()) throw DataError("missing column: " + name);
    return it->second;
  }

  // column with every value present; throws naming the missing rows
  const std::vector<double>& dense(const std::string& name) const {
    const Column& col = column(name);
    if (col.missing_count() > 0) {
      std::ostringstream msg;
      msg << "column '" << name << "' has missing values in rows:";
      std::size_t listed = 0;
      for (std::size_t i = 0; i < col.missing.size(); ++i) {
        if (!col.missing[i]) continue;
        if (listed++ == 8) {
          msg << " ... (" << col.missing_count() << " total)";
          break;
        }
        msg << ' ' << ids_[i];
      }
      throw DataError(msg.str());
    }
    return col.values;
  }

  // Reorder rows to match the region set; every table id must exist in
  // the set and vice versa, otherwise the orphans are listed.
  AttributeTable align_to(const RegionSet& regions) const {
    std::vector<std::string> orphan_rows;
    std::vector<std::size_t> source_row(regions.size(), SIZE_MAX);
    std::vector<std::uint8_t> claimed(ids_.size(), 0);
    for (std::size_t i = 0; i < ids_.size(); ++i) {
      auto idx = regions.index_of(ids_[i]);
      if (!idx) {
        orphan_rows.push_back(ids_[i]);
      } else {
        source_row[*idx] = i;
        claimed[i] = 1;
      }
    }
    std::vector<std::string> orphan_regions;
    for (std::size_t i = 0; i < regions.size(); ++i) {
      if (source_row[i] == SIZE_MAX) orphan_regions.push_back(regions[i].id);
    }
    if (!orphan_rows.empty() || !orphan_regions.empty()) {
      std::ostringstream msg;
      msg << "attribute join failed:";
      if (!orphan_rows.empty()) {
        msg << " " << orphan_rows.size() << " table id(s) without a region (";
        for (std::size_t i = 0; i < orphan_rows.size() && i < 8; ++i)
          msg << (i ? ", " : "") << orphan_rows[i];
        msg << ")";
      }
      if (!orphan_regions.empty()) {
        msg << " " << orphan_regions.size() << " region id(s) without a row (";
        for (std::size_t i = 0; i < orphan_regions.size() && i < 8; ++i)
          msg << (i ? ", " : "") << orphan_regions[i];
        msg << ")";
      }
      throw DataError(msg.str());
    }
    AttributeTable out(regions.ids());
    for (const std::string& name : order_) {
      const Column& col = columns_.at(name);
      std::vector<double> values(regions.size());
      std::vector<std::uint8_t> missing(regions.size());
      for (std::size_t i = 0; i < regions.size(); ++i) {
        values[i] = col.values[source_row[i]];
        missing[i] = col.missing[source_row[i]];
      }
      out.add_column(name, std::move(values), std::move(missing));
    }
    return out;
  }

 private:
  std::vector<std::string> ids_;
  std::vector<std::string> order_;
  std::map<std::string, Column> columns_;
};

}  // namespace floodaudit

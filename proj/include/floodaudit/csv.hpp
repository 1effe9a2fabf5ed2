#pragma once

// RFC 4180 CSV reading/writing, attribute-table parsing, and report-row
// ingestion. Non-numeric cells in numeric columns become explicit
// missing values, never zeros.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "floodaudit/attributes.hpp"
#include "floodaudit/error.hpp"
#include "floodaudit/numfmt.hpp"

namespace floodaudit {

struct CsvDocument {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column_index(const std::string& name) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError("missing CSV column: " + name);
    return static_cast<std::size_t>(it - header.begin());
  }
};

// Full RFC 4180 parse: quoted fields, "" escapes, embedded separators
// and newlines, CRLF or LF endings.
inline CsvDocument read_csv(std::istream& in, const std::string& what = "CSV") {
  CsvDocument doc;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool in_field = false;
  bool any_record = false;

  auto end_field = [&] {
    record.push_back(field);
    field.clear();
    in_field = false;
  };
  auto end_record = [&] {
    end_field();
    if (!any_record) {
      doc.header = record;
      any_record = true;
    } else {
      if (record.size() != doc.header.size()) {
        throw DataError(what + ": row " + std::to_string(doc.rows.size() + 2) + " has " +
                        std::to_string(record.size()) + " fields, header has " +
                        std::to_string(doc.header.size()));
      }
      doc.rows.push_back(record);
    }
    record.clear();
  };

  char c;
  while (in.get(c)) {
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      in_field = true;
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        in_field = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;  // handled by the following '\n'
      case '\n':
        end_record();
        break;
      default:
        field.push_back(c);
        in_field = true;
        break;
    }
  }
  if (quoted) throw DataError(what + ": unterminated quoted field");
  if (in_field || !record.empty()) end_record();  // final line without newline
  if (!any_record) throw DataError(what + ": empty document");
  return doc;
}

inline CsvDocument read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return read_csv(in, path);
}

inline void write_csv_field(std::ostream& out, std::string_view field) {
  bool needs_quote =
      field.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!needs_quote) {
    out << field;
    return;
  }
  out << '"';
  for (char c : field) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

inline void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    write_csv_field(out, fields[i]);
  }
  out << "\r\n";
}

// Attribute CSV -> table: id column as row key, every other column
// parsed numerically with explicit missing on parse failure.
inline AttributeTable parse_attributes(std::istream& in, const std::string& id_column,
                                       const std::string& what = "attributes") {
  CsvDocument doc = read_csv(in, what);
  if (doc.rows.empty()) throw DataError(what + ": table has no data rows");
  std::size_t id_idx = 0;
  try {
    id_idx = doc.column_index(id_column);
  } catch (const DataError&) {
    throw DataError(what + ": missing id column '" + id_column + "'");
  }

  std::vector<std::string> ids;
  ids.reserve(doc.rows.size());
  for (const auto& row : doc.rows) ids.push_back(row[id_idx]);
  {
    auto sorted = ids;
    std::sort(sorted.begin(), sorted.end());
    auto dup = std::adjacent_find(sorted.begin(), sorted.end());
    if (dup != sorted.end()) throw DataError(what + ": duplicate id '" + *dup + "'");
  }

  AttributeTable table(std::move(ids));
  for (std::size_t c = 0; c < doc.header.size(); ++c) {
    if (c == id_idx) continue;
    std::vector<double> values(doc.rows.size(), 0.0);
    std::vector<std::uint8_t> missing(doc.rows.size(), 0);
    for (std::size_t r = 0; r < doc.rows.size(); ++r) {
      auto parsed = parse_double(doc.rows[r][c]);
      if (parsed) {
        values[r] = *parsed;
      } else {
        missing[r] = 1;
      }
    }
    table.add_column(doc.header[c], std::move(values), std::move(missing));
  }
  return table;
}

inline AttributeTable parse_attributes_file(const std::string& path,
                                            const std::string& id_column) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return parse_attributes(in, id_column, path);
}

// One crowdsourced report: where, what, when.
struct ReportRow {
  std::string region_id;
  std::string category;
  std::string timestamp;  // ISO 8601; the leading YYYY-MM-DD is the date
};

inline std::string_view date_part(std::string_view timestamp) {
  return timestamp.substr(0, std::min<std::size_t>(10, timestamp.size()));
}

inline std::vector<ReportRow> parse_reports(std::istream& in,
                                            const std::string& what = "reports") {
  CsvDocument doc = read_csv(in, what);
  std::size_t id_idx = doc.column_index("id");
  std::size_t cat_idx = doc.column_index("category");
  std::size_t ts_idx = doc.column_index("timestamp");
  std::vector<ReportRow> rows;
  rows.reserve(doc.rows.size());
  for (const auto& row : doc.rows) {
    rows.push_back(ReportRow{row[id_idx], row[cat_idx], row[ts_idx]});
  }
  return rows;
}

inline std::vector<ReportRow> parse_reports_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return parse_reports(in, path);
}

// inclusive [start, end] filter on the date part, ISO order == lexicographic
inline std::vector<ReportRow> filter_by_date(const std::vector<ReportRow>& rows,
                                             const std::string& start,
                                             const std::string& end) {
  std::vector<ReportRow> out;
  for (const ReportRow& r : rows) {
    auto d = date_part(r.timestamp);
    if (d >= start && d <= end) out.push_back(r);
  }
  return out;
}

}  // namespace floodaudit

#pragma once

// Config-driven orchestration of the full audit: ingest -> category
// filters -> rate normalization -> disaggregation -> min-max scaling ->
// weights -> global Moran (baseline vs expanded) -> LISA per dataset ->
// BI-LISA damage x reports -> cluster ANOVA -> regression models.
//
// One audit = one JSON config = one output directory. Reruns with the
// same config and inputs produce byte-identical outputs for any worker
// count.

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "floodaudit/attributes.hpp"
#include "floodaudit/csv.hpp"
#include "floodaudit/error.hpp"
#include "floodaudit/esda.hpp"
#include "floodaudit/geojson.hpp"
#include "floodaudit/hierarchy.hpp"
#include "floodaudit/infer.hpp"
#include "floodaudit/numfmt.hpp"
#include "floodaudit/transform.hpp"
#include "floodaudit/weights.hpp"

namespace floodaudit {

struct AuditConfig {
  // inference parameters
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::size_t permutations = 999;
  double alpha = 0.05;
  Adjacency adjacency = Adjacency::queen;
  Scheme scheme = Scheme::binary;
  double snap = 0.0;
  std::size_t threads = 1;

  // inputs; paths are resolved against the config file's directory
  std::string id_property = "GEOID";
  std::vector<std::pair<Level, std::string>> geometry;    // level -> GeoJSON path
  std::map<std::string, std::string> attributes;          // level name -> CSV path
  std::string reports_path;
  std::string date_start, date_end;  // inclusive window, YYYY-MM-DD

  CategoryFilter baseline{"baseline", {}};
  CategoryFilter expanded{"expanded", {}};

  // pipeline switches
  std::string damage_column = "FEMA damage";
  std::string denominator_column;  // empty = keep raw counts
  bool disaggregate_damage = false;
  bool minmax = true;
  std::vector<std::string> traits = {"Poverty%", "NOEDU%", "Single parent household%",
                                     "Minority%"};
  std::vector<int> models = {1, 2, 3, 4};

  std::string output_dir;
};

namespace detail {

inline bool looks_like_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9}) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  return true;
}

inline std::string resolve_path(const std::string& base_dir, const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_absolute() || base_dir.empty()) return path;
  return (std::filesystem::path(base_dir) / p).string();
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

}  // namespace detail

// Parse the JSON document into a config without validating; callers may
// override fields (CLI flags) before validate_audit_config.
inline AuditConfig parse_audit_config(const nlohmann::json& doc, const std::string& base_dir = "") {
  if (!doc.is_object()) throw ConfigError("config: top-level JSON value must be an object");
  AuditConfig cfg;

  auto get_string = [&](const char* key, std::string& into) {
    if (doc.contains(key) && doc[key].is_string()) into = doc[key].get<std::string>();
  };

  if (doc.contains("seed") && doc["seed"].is_number()) {
    cfg.seed = doc["seed"].get<std::uint64_t>();
    cfg.seed_set = true;
  }
  if (doc.contains("permutations") && doc["permutations"].is_number()) {
    cfg.permutations = doc["permutations"].get<std::size_t>();
  }
  if (doc.contains("alpha") && doc["alpha"].is_number()) cfg.alpha = doc["alpha"].get<double>();
  if (doc.contains("snap") && doc["snap"].is_number()) cfg.snap = doc["snap"].get<double>();
  if (doc.contains("threads") && doc["threads"].is_number()) {
    cfg.threads = doc["threads"].get<std::size_t>();
  }
  if (doc.contains("minmax_normalize") && doc["minmax_normalize"].is_boolean()) {
    cfg.minmax = doc["minmax_normalize"].get<bool>();
  }
  if (doc.contains("disaggregate_damage") && doc["disaggregate_damage"].is_boolean()) {
    cfg.disaggregate_damage = doc["disaggregate_damage"].get<bool>();
  }
  std::string adjacency = "queen", scheme = "binary";
  get_string("adjacency", adjacency);
  get_string("scheme", scheme);
  if (adjacency == "rook") cfg.adjacency = Adjacency::rook;
  if (scheme == "row" || scheme == "row_standardized") cfg.scheme = Scheme::row_standardized;
  get_string("id_property", cfg.id_property);
  get_string("damage_column", cfg.damage_column);
  get_string("denominator_column", cfg.denominator_column);
  get_string("output_dir", cfg.output_dir);
  cfg.output_dir = detail::resolve_path(base_dir, cfg.output_dir);

  if (doc.contains("geometry") && doc["geometry"].is_object()) {
    for (Level level : {Level::tract, Level::block_group, Level::custom}) {
      const char* name = to_string(level);
      if (doc["geometry"].contains(name) && doc["geometry"][name].is_string()) {
        cfg.geometry.emplace_back(
            level, detail::resolve_path(base_dir, doc["geometry"][name].get<std::string>()));
      }
    }
  }
  if (doc.contains("attributes") && doc["attributes"].is_object()) {
    for (const auto& [key, value] : doc["attributes"].items()) {
      if (value.is_string()) {
        cfg.attributes[key] = detail::resolve_path(base_dir, value.get<std::string>());
      }
    }
  }
  if (doc.contains("reports") && doc["reports"].is_object()) {
    const auto& rep = doc["reports"];
    if (rep.contains("path") && rep["path"].is_string()) {
      cfg.reports_path = detail::resolve_path(base_dir, rep["path"].get<std::string>());
    }
    if (rep.contains("date_start") && rep["date_start"].is_string()) {
      cfg.date_start = rep["date_start"].get<std::string>();
    }
    if (rep.contains("date_end") && rep["date_end"].is_string()) {
      cfg.date_end = rep["date_end"].get<std::string>();
    }
  }
  if (doc.contains("categories") && doc["categories"].is_object()) {
    auto read_filter = [&](const char* key, CategoryFilter& f) {
      if (doc["categories"].contains(key) && doc["categories"][key].is_array()) {
        for (const auto& c : doc["categories"][key]) {
          if (c.is_string()) f.categories.push_back(c.get<std::string>());
        }
      }
    };
    read_filter("baseline", cfg.baseline);
    read_filter("expanded", cfg.expanded);
  }
  if (doc.contains("traits") && doc["traits"].is_array()) {
    cfg.traits.clear();
    for (const auto& t : doc["traits"]) {
      if (t.is_string()) cfg.traits.push_back(t.get<std::string>());
    }
  }
  if (doc.contains("models") && doc["models"].is_array()) {
    cfg.models.clear();
    for (const auto& m : doc["models"]) {
      if (m.is_number_integer()) cfg.models.push_back(m.get<int>());
    }
  }
  return cfg;
}

// Every violation is reported, not just the first.
inline std::vector<std::string> audit_config_violations(const AuditConfig& cfg) {
  std::vector<std::string> v;
  if (!cfg.seed_set) v.push_back("seed: required (numeric) and missing");
  if (cfg.permutations < 99) {
    v.push_back("permutations: must be >= 99 because reports emit significance stars");
  }
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) v.push_back("alpha: must lie in (0,1)");
  if (cfg.snap < 0.0) v.push_back("snap: must be >= 0");
  if (cfg.geometry.empty()) v.push_back("geometry: at least one level is required");
  bool has_custom = false, has_census = false;
  for (const auto& [level, path] : cfg.geometry) {
    if (level == Level::custom) has_custom = true;
    else has_census = true;
    if (!std::filesystem::exists(path)) {
      v.push_back(std::string("geometry.") + to_string(level) + ": file not found: " + path);
    }
    if (!cfg.attributes.contains(to_string(level))) {
      v.push_back(std::string("attributes.") + to_string(level) + ": required for this level");
    }
  }
  if (has_custom && has_census) {
    v.push_back("geometry: custom level cannot be combined with census levels");
  }
  for (const auto& [name, path] : cfg.attributes) {
    if (!std::filesystem::exists(path)) {
      v.push_back("attributes." + name + ": file not found: " + path);
    }
  }
  if (cfg.reports_path.empty()) {
    v.push_back("reports.path: required");
  } else if (!std::filesystem::exists(cfg.reports_path)) {
    v.push_back("reports.path: file not found: " + cfg.reports_path);
  }
  if (!detail::looks_like_date(cfg.date_start)) {
    v.push_back("reports.date_start: required, format YYYY-MM-DD");
  }
  if (!detail::looks_like_date(cfg.date_end)) {
    v.push_back("reports.date_end: required, format YYYY-MM-DD");
  }
  if (detail::looks_like_date(cfg.date_start) && detail::looks_like_date(cfg.date_end) &&
      cfg.date_start > cfg.date_end) {
    v.push_back("reports: date_start is after date_end");
  }
  if (cfg.baseline.categories.empty()) v.push_back("categories.baseline: must be non-empty");
  if (cfg.expanded.categories.empty()) v.push_back("categories.expanded: must be non-empty");
  if (cfg.models.empty()) v.push_back("models: must list at least one of 1..4");
  for (int m : cfg.models) {
    if (m < 1 || m > 4) v.push_back("models: invalid model id " + std::to_string(m));
  }
  if (cfg.output_dir.empty()) v.push_back("output_dir: required");
  if (cfg.disaggregate_damage) {
    bool tract = false, bg = false;
    for (const auto& [level, path] : cfg.geometry) {
      tract |= level == Level::tract;
      bg |= level == Level::block_group;
    }
    if (!tract || !bg) {
      v.push_back("disaggregate_damage: requires both tract and block_group levels");
    }
  }
  return v;
}

inline AuditConfig validate_audit_config(const AuditConfig& cfg) {
  auto violations = audit_config_violations(cfg);
  if (!violations.empty()) {
    std::ostringstream msg;
    msg << "invalid config (" << violations.size() << " problem(s)):";
    for (const auto& p : violations) msg << "\n  - " << p;
    throw ConfigError(msg.str());
  }
  return cfg;
}

inline AuditConfig load_audit_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": malformed JSON: " + e.what());
  }
  return parse_audit_config(doc, std::filesystem::path(path).parent_path().string());
}

inline AuditConfig validate_config(const std::string& path) {
  return validate_audit_config(load_audit_config(path));
}

inline nlohmann::json config_to_json(const AuditConfig& cfg) {
  nlohmann::json geometry = nlohmann::json::object();
  for (const auto& [level, path] : cfg.geometry) geometry[to_string(level)] = path;
  return nlohmann::json{
      {"seed", cfg.seed},
      {"permutations", cfg.permutations},
      {"alpha", cfg.alpha},
      {"adjacency", to_string(cfg.adjacency)},
      {"scheme", to_string(cfg.scheme)},
      {"snap", cfg.snap},
      {"id_property", cfg.id_property},
      {"geometry", geometry},
      {"attributes", cfg.attributes},
      {"reports",
       {{"path", cfg.reports_path}, {"date_start", cfg.date_start}, {"date_end", cfg.date_end}}},
      {"categories",
       {{"baseline", cfg.baseline.categories}, {"expanded", cfg.expanded.categories}}},
      {"damage_column", cfg.damage_column},
      {"denominator_column", cfg.denominator_column},
      {"disaggregate_damage", cfg.disaggregate_damage},
      {"minmax_normalize", cfg.minmax},
      {"traits", cfg.traits},
      {"models", cfg.models},
      {"output_dir", cfg.output_dir},
  };
}

// ---------------------------------------------------------------------------
// audit report model

struct DatasetResult {
  std::string name;  // "damage", "baseline", "expanded"
  std::vector<double> values;
  double total_raw = 0.0;   // raw matched count/value sum before scaling
  bool degenerate = false;  // constant column; statistics skipped
  std::string note;
  std::optional<MoranResult> moran;
  std::optional<LisaResult> lisa;
  std::size_t significant_clusters = 0;
};

struct PairResult {
  std::string label;  // e.g. "damage_x_expanded"
  std::string x_dataset, y_dataset;
  std::optional<BivariateResult> bilisa;
  std::string note;
  std::vector<ClusterAnova> anovas;
  std::string anova_note;
};

struct ModelRun {
  int model_id = 0;
  std::optional<RegressionResult> result;
  std::string note;
};

struct RegressionBlock {
  std::string dataset;
  std::vector<ModelRun> models;
};

struct LevelReport {
  Level level = Level::custom;
  std::size_t n_regions = 0;
  std::vector<std::uint32_t> islands;
  DescriptiveStats stats;
  std::vector<DatasetResult> datasets;
  std::vector<PairResult> pairs;
  std::vector<RegressionBlock> regressions;
};

struct AuditReport {
  std::string config_hash;
  std::vector<LevelReport> levels;
  std::vector<std::string> diagnostics;
  std::vector<std::string> files_written;
  std::size_t reports_total = 0;
  std::size_t reports_in_window = 0;
};

// ---------------------------------------------------------------------------
// CSV table helpers

namespace detail {

class TableWriter {
 public:
  TableWriter(const std::filesystem::path& path, std::vector<std::string> header,
              const AuditConfig& cfg, std::vector<std::string>& files)
      : out_(path, std::ios::binary) {
    if (!out_) throw DataError("cannot write " + path.string());
    files.push_back(path.string());
    meta_ = {format_size(cfg.permutations), std::to_string(cfg.seed),
             to_string(cfg.adjacency), to_string(cfg.scheme)};
    header.insert(header.end(), {"permutations", "seed", "adjacency", "scheme"});
    write_csv_row(out_, header);
  }

  void row(std::vector<std::string> fields) {
    fields.insert(fields.end(), meta_.begin(), meta_.end());
    write_csv_row(out_, fields);
  }

 private:
  std::ofstream out_;
  std::vector<std::string> meta_;
};

inline std::string fmt_opt(double v) {
  return std::isnan(v) ? std::string() : format_double(v);
}

}  // namespace detail

// Write LISA/BI-LISA per-region results as GeoJSON: the ingested
// features with cluster/stat/pseudo_p properties added. Geometry is the
// parsed input geometry, re-emitted verbatim. Islands carry no pseudo_p.
inline void emit_geojson(const LocalMoranResult& res, const RegionSet& regions,
                         const std::string& path, const std::string& id_property = "GEOID") {
  if (res.local.size() != regions.size()) {
    throw DataError("emit_geojson: results not aligned with region set");
  }
  std::vector<nlohmann::json> stat(regions.size()), pseudo_p(regions.size()),
      cluster(regions.size());
  for (std::size_t i = 0; i < regions.size(); ++i) {
    stat[i] = res.local[i];
    cluster[i] = to_string(res.cluster[i]);
    pseudo_p[i] = std::isnan(res.pseudo_p[i]) ? nlohmann::json() : nlohmann::json(res.pseudo_p[i]);
  }
  nlohmann::json doc = to_feature_collection(
      regions, {{"stat", stat}, {"pseudo_p", pseudo_p}, {"cluster", cluster}}, id_property);
  write_geojson_file(doc, path);
}

inline void emit_local_csv(const LocalMoranResult& res, const RegionSet& regions,
                           const std::filesystem::path& path, const AuditConfig& cfg,
                           std::vector<std::string>& files) {
  detail::TableWriter table(path, {"id", "stat", "pseudo_p", "cluster"}, cfg, files);
  for (std::size_t i = 0; i < regions.size(); ++i) {
    table.row({regions[i].id, format_double(res.local[i]), detail::fmt_opt(res.pseudo_p[i]),
               to_string(res.cluster[i])});
  }
}

// ---------------------------------------------------------------------------
// run_audit

namespace detail {

struct LevelData {
  Level level = Level::custom;
  RegionSet regions;
  AttributeTable attrs;
  WeightMatrix weights;
  std::vector<double> damage_raw;
};

inline std::size_t count_significant(const LocalMoranResult& res) {
  std::size_t c = 0;
  for (ClusterClass cl : res.cluster) {
    c += cl == ClusterClass::high_high || cl == ClusterClass::low_low ||
         cl == ClusterClass::high_low || cl == ClusterClass::low_high;
  }
  return c;
}

// min-max scale unless disabled; a constant column is reported as
// degenerate instead of aborting the audit (the spec's fail-early rule
// applies to direct transform calls; the audit keeps both table rows).
inline void scale_dataset(DatasetResult& ds, bool minmax, std::vector<std::string>& diagnostics,
                          const std::string& where) {
  double lo = ds.values[0], hi = ds.values[0];
  for (double v : ds.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!(hi > lo)) {
    ds.degenerate = true;
    ds.note = "degenerate range (all values equal " + format_double(lo) + ")";
    diagnostics.push_back(where + ": " + ds.note);
    return;
  }
  if (minmax) ds.values = minmax_normalize(ds.values);
}

}  // namespace detail

inline AuditReport run_audit(const AuditConfig& cfg) {
  validate_audit_config(cfg);
  AuditReport report;
  report.config_hash = detail::hex64(detail::fnv1a(config_to_json(cfg).dump()));

  std::filesystem::create_directories(cfg.output_dir);
  const std::filesystem::path out_dir(cfg.output_dir);

  // --- ingest ---------------------------------------------------------
  std::vector<detail::LevelData> levels;
  for (const auto& [level, path] : cfg.geometry) {
    detail::LevelData data;
    data.level = level;
    data.regions = parse_geometry_file(path, cfg.id_property, level);
    const std::string level_name = to_string(level);
    data.attrs =
        parse_attributes_file(cfg.attributes.at(level_name), cfg.id_property).align_to(data.regions);
    for (std::size_t i = 0; i < data.regions.size(); ++i) {
      if (data.regions[i].degenerate) {
        report.diagnostics.push_back(level_name + ": region " + data.regions[i].id +
                                     " has degenerate (zero-area) geometry");
      }
    }
    WeightMatrix binary = build_contiguity(data.regions, cfg.adjacency, cfg.snap);
    data.weights = cfg.scheme == Scheme::binary ? binary : row_standardize(binary);
    levels.push_back(std::move(data));
  }

  // two census levels => hierarchy from block groups up to tracts
  detail::LevelData* tract_level = nullptr;
  detail::LevelData* bg_level = nullptr;
  for (auto& data : levels) {
    if (data.level == Level::tract) tract_level = &data;
    if (data.level == Level::block_group) bg_level = &data;
  }
  std::optional<Hierarchy> hierarchy;
  if (tract_level && bg_level) {
    hierarchy = build_hierarchy(bg_level->regions, tract_level->regions);
    double lo = 1.0, hi = 1.0;
    if (!hierarchy->child_area_ratio.empty()) {
      lo = hi = hierarchy->child_area_ratio[0];
      for (double r : hierarchy->child_area_ratio) {
        lo = std::min(lo, r);
        hi = std::max(hi, r);
      }
    }
    report.diagnostics.push_back("hierarchy: child-area/parent-area ratio range [" +
                                 format_double(lo) + ", " + format_double(hi) + "]");
  }

  // --- damage ---------------------------------------------------------
  for (auto& data : levels) {
    if (cfg.disaggregate_damage && data.level == Level::block_group) continue;
    data.damage_raw = data.attrs.dense(cfg.damage_column);
  }
  if (cfg.disaggregate_damage && tract_level && bg_level) {
    bg_level->damage_raw = disaggregate_by_area(tract_level->damage_raw, *hierarchy,
                                                bg_level->regions, tract_level->regions);
  }

  // --- reports: filters at the finest level, rolled up if nested ------
  std::vector<ReportRow> all_reports = parse_reports_file(cfg.reports_path);
  report.reports_total = all_reports.size();
  std::vector<ReportRow> window = filter_by_date(all_reports, cfg.date_start, cfg.date_end);
  report.reports_in_window = window.size();
  if (window.size() < all_reports.size()) {
    report.diagnostics.push_back(
        "reports: " + std::to_string(all_reports.size() - window.size()) +
        " row(s) outside the date window " + cfg.date_start + ".." + cfg.date_end);
  }

  detail::LevelData& fine = bg_level ? *bg_level : levels.back();
  std::map<std::string, CategoryCounts> fine_counts;
  for (const CategoryFilter* filter : {&cfg.baseline, &cfg.expanded}) {
    CategoryCounts counts = apply_category_filter(window, *filter, fine.regions);
    for (const auto& [id, c] : counts.unknown_regions) {
      report.diagnostics.push_back("reports (" + filter->label + "): " + std::to_string(c) +
                                   " row(s) reference unknown region id " + id);
    }
    fine_counts.emplace(filter->label, std::move(counts));
  }
  {
    const auto& residual = fine_counts.at("expanded").residual;
    for (const auto& [cat, c] : residual) {
      report.diagnostics.push_back("reports: category '" + cat + "' (" + std::to_string(c) +
                                   " row(s)) matched no expanded filter entry");
    }
  }

  // --- per-level dataset pipeline --------------------------------------
  std::size_t anova_runs = 0;
  for (auto& data : levels) {
    LevelReport lr;
    lr.level = data.level;
    lr.n_regions = data.regions.size();
    lr.islands = data.weights.islands;
    const std::string level_name = to_string(data.level);
    for (std::uint32_t island : data.weights.islands) {
      report.diagnostics.push_back(level_name + ": region " + data.regions[island].id +
                                   " is an island (no neighbors)");
    }

    // damage dataset
    DatasetResult damage;
    damage.name = "damage";
    damage.values = data.damage_raw;
    for (double v : damage.values) damage.total_raw += v;
    detail::scale_dataset(damage, cfg.minmax, report.diagnostics, level_name + "/damage");

    // report datasets: counts -> (optional) rates -> (optional) min-max
    std::vector<DatasetResult> datasets;
    for (const std::string label : {"baseline", "expanded"}) {
      DatasetResult ds;
      ds.name = label;
      const CategoryCounts& fine_c = fine_counts.at(label);
      if (&data == &fine) {
        ds.values = fine_c.counts;
      } else {
        // roll fine counts up to this level through the hierarchy
        ds.values.assign(data.regions.size(), 0.0);
        for (std::size_t c = 0; c < fine.regions.size(); ++c) {
          ds.values[hierarchy->parent_of[c]] += fine_c.counts[c];
        }
      }
      ds.total_raw = static_cast<double>(fine_c.matched_total);
      if (!cfg.denominator_column.empty()) {
        RateResult rates = rate_normalize(ds.values, data.attrs.dense(cfg.denominator_column),
                                          RateKind::custom, data.regions.ids());
        if (!rates.zero_zero_regions.empty()) {
          report.diagnostics.push_back(level_name + "/" + label + ": " +
                                       std::to_string(rates.zero_zero_regions.size()) +
                                       " region(s) with zero count and zero denominator");
        }
        ds.values = std::move(rates.rates);
      }
      detail::scale_dataset(ds, cfg.minmax, report.diagnostics, level_name + "/" + label);
      datasets.push_back(std::move(ds));
    }
    datasets.insert(datasets.begin(), std::move(damage));

    // --- descriptive statistics (Tables 1-2 shape) ---
    {
      AttributeTable stats_table(data.regions.ids());
      for (const DatasetResult& ds : datasets) stats_table.add_column(ds.name, ds.values);
      if (data.attrs.has_column(model_columns::population)) {
        stats_table.add_column(model_columns::population,
                               data.attrs.dense(model_columns::population));
      }
      for (const std::string& trait : cfg.traits) {
        if (data.attrs.has_column(trait)) stats_table.add_column(trait, data.attrs.dense(trait));
      }
      lr.stats = descriptive_stats(stats_table);
    }

    // --- global Moran + LISA per dataset ---
    for (DatasetResult& ds : datasets) {
      if (ds.degenerate) continue;
      AttributeVector vec(ds.values);
      ds.moran = global_moran(vec, data.weights, cfg.permutations, cfg.seed);
      ds.lisa = lisa(vec, data.weights, cfg.permutations, cfg.seed, cfg.alpha, cfg.threads);
      ds.significant_clusters = detail::count_significant(*ds.lisa);
    }

    // --- BI-LISA damage x reports + cluster ANOVA ---
    for (const std::string target : {"baseline", "expanded"}) {
      PairResult pair;
      pair.label = "damage_x_" + target;
      pair.x_dataset = "damage";
      pair.y_dataset = target;
      const DatasetResult& x = datasets[0];
      const DatasetResult* y = nullptr;
      for (const DatasetResult& ds : datasets) {
        if (ds.name == target) y = &ds;
      }
      if (x.degenerate || y->degenerate) {
        pair.note = "skipped: degenerate input (" + std::string(x.degenerate ? "damage" : target) +
                    ")";
        report.diagnostics.push_back(level_name + "/" + pair.label + ": " + pair.note);
        lr.pairs.push_back(std::move(pair));
        continue;
      }
      AttributeVector xv(x.values), yv(y->values);
      pair.bilisa =
          bilisa(xv, yv, data.weights, cfg.permutations, cfg.seed, cfg.alpha, cfg.threads);
      try {
        pair.anovas = anova_over_clusters(*pair.bilisa, data.attrs, cfg.traits);
        anova_runs += pair.anovas.size();
      } catch (const std::exception& e) {
        pair.anova_note = e.what();
        report.diagnostics.push_back(level_name + "/" + pair.label + ": ANOVA skipped: " +
                                     e.what());
      }
      lr.pairs.push_back(std::move(pair));
    }

    // --- regression models (Tables 8-9 shape) ---
    for (const std::string target : {"baseline", "expanded"}) {
      RegressionBlock block;
      block.dataset = target;
      const DatasetResult* y = nullptr;
      for (const DatasetResult& ds : datasets) {
        if (ds.name == target) y = &ds;
      }
      // regression sees the pipeline-processed damage under its
      // canonical column name; other predictors come from the table
      AttributeTable reg_table(data.regions.ids());
      reg_table.add_column(model_columns::damage, datasets[0].values);
      for (const std::string& name : data.attrs.column_names()) {
        if (name == model_columns::damage || name == cfg.damage_column) continue;
        reg_table.add_column(name, data.attrs.column(name).values,
                             data.attrs.column(name).missing);
      }
      for (int model_id : cfg.models) {
        ModelRun run;
        run.model_id = model_id;
        try {
          Design design = model_matrix(reg_table, model_id);
          run.result = ols(y->values, design, model_id);
        } catch (const std::exception& e) {
          run.note = e.what();
          report.diagnostics.push_back(level_name + "/regression " + target + " model " +
                                       std::to_string(model_id) + ": " + e.what());
        }
        block.models.push_back(std::move(run));
      }
      lr.regressions.push_back(std::move(block));
    }

    lr.datasets = std::move(datasets);
    report.levels.push_back(std::move(lr));
  }

  if (anova_runs > 10) {
    report.diagnostics.push_back("note: " + std::to_string(anova_runs) +
                                 " ANOVA tests ran in one audit without multiple-comparison "
                                 "correction");
  }

  // --------------------------------------------------------------------
  // emit tables

  // descriptive stats: one row per variable, one column block per level
  {
    std::vector<std::string> header{"variable"};
    for (const LevelReport& lr : report.levels) {
      std::string ln = to_string(lr.level);
      for (const char* f : {"min", "max", "mean", "std", "count"}) {
        header.push_back(ln + "_" + f);
      }
    }
    detail::TableWriter table(out_dir / "descriptive_stats.csv", header, cfg,
                              report.files_written);
    std::vector<std::string> variables;
    for (const LevelReport& lr : report.levels) {
      for (const ColumnStats& cs : lr.stats) {
        if (std::find(variables.begin(), variables.end(), cs.name) == variables.end()) {
          variables.push_back(cs.name);
        }
      }
    }
    for (const std::string& var : variables) {
      std::vector<std::string> row{var};
      for (const LevelReport& lr : report.levels) {
        const ColumnStats* found = nullptr;
        for (const ColumnStats& cs : lr.stats) {
          if (cs.name == var) found = &cs;
        }
        if (found) {
          row.insert(row.end(),
                     {format_double(found->minimum), format_double(found->maximum),
                      format_double(found->mean), format_double(found->stddev),
                      format_size(found->count)});
        } else {
          row.insert(row.end(), {"", "", "", "", ""});
        }
      }
      table.row(row);
    }
  }

  // Table 3 shape: baseline vs expanded global Moran across levels
  {
    std::vector<std::string> header{"dataset", "total_reports"};
    for (const LevelReport& lr : report.levels) {
      std::string ln = to_string(lr.level);
      header.insert(header.end(), {ln + "_moran_i", ln + "_pseudo_p", ln + "_stars",
                                   ln + "_significant_clusters"});
    }
    detail::TableWriter table(out_dir / "global_moran_categories.csv", header, cfg,
                              report.files_written);
    for (const std::string name : {"baseline", "expanded"}) {
      std::vector<std::string> row;
      double total = 0.0;
      std::vector<std::string> cells;
      for (const LevelReport& lr : report.levels) {
        for (const DatasetResult& ds : lr.datasets) {
          if (ds.name != name) continue;
          total = ds.total_raw;
          if (ds.moran) {
            cells.insert(cells.end(),
                         {format_double(ds.moran->moran_i), detail::fmt_opt(ds.moran->pseudo_p),
                          significance_stars(ds.moran->pseudo_p),
                          format_size(ds.significant_clusters)});
          } else {
            cells.insert(cells.end(), {"", "", "", "0"});
          }
        }
      }
      row.push_back(name);
      row.push_back(format_double(total));
      row.insert(row.end(), cells.begin(), cells.end());
      table.row(row);
    }
  }

  // Table 4 shape: per-dataset global Moran across levels
  {
    std::vector<std::string> header{"dataset"};
    for (const LevelReport& lr : report.levels) {
      std::string ln = to_string(lr.level);
      header.insert(header.end(), {ln + "_moran_i", ln + "_pseudo_p", ln + "_stars"});
    }
    detail::TableWriter table(out_dir / "global_moran_datasets.csv", header, cfg,
                              report.files_written);
    for (const std::string name : {"damage", "baseline", "expanded"}) {
      std::vector<std::string> row{name};
      for (const LevelReport& lr : report.levels) {
        const DatasetResult* ds = nullptr;
        for (const DatasetResult& d : lr.datasets) {
          if (d.name == name) ds = &d;
        }
        if (ds && ds->moran) {
          row.insert(row.end(),
                     {format_double(ds->moran->moran_i), detail::fmt_opt(ds->moran->pseudo_p),
                      significance_stars(ds->moran->pseudo_p)});
        } else {
          row.insert(row.end(), {"", "", ""});
        }
      }
      table.row(row);
    }
  }

  // Table 5 shape: bivariate global Moran across levels
  {
    std::vector<std::string> header{"pair"};
    for (const LevelReport& lr : report.levels) {
      std::string ln = to_string(lr.level);
      header.insert(header.end(), {ln + "_moran_i", ln + "_stars"});
    }
    detail::TableWriter table(out_dir / "bivariate_global.csv", header, cfg,
                              report.files_written);
    for (const std::string label : {"damage_x_baseline", "damage_x_expanded"}) {
      std::vector<std::string> row{label};
      for (const LevelReport& lr : report.levels) {
        const PairResult* pr = nullptr;
        for (const PairResult& p : lr.pairs) {
          if (p.label == label) pr = &p;
        }
        if (pr && pr->bilisa) {
          // star from the most significant local p as a summary gate is
          // not meaningful; the global pseudo-p comes from the
          // univariate-style permutation of the paired global statistic
          row.insert(row.end(), {format_double(pr->bilisa->global), ""});
        } else {
          row.insert(row.end(), {"", ""});
        }
      }
      table.row(row);
    }
  }

  // per-region LISA / BI-LISA layers
  for (const LevelReport& lr : report.levels) {
    const std::string ln = to_string(lr.level);
    const detail::LevelData* data = nullptr;
    for (const auto& d : levels) {
      if (d.level == lr.level) data = &d;
    }
    for (const DatasetResult& ds : lr.datasets) {
      if (!ds.lisa) continue;
      emit_local_csv(*ds.lisa, data->regions, out_dir / ("lisa_" + ds.name + "_" + ln + ".csv"),
                     cfg, report.files_written);
      std::string gj = (out_dir / ("lisa_" + ds.name + "_" + ln + ".geojson")).string();
      emit_geojson(*ds.lisa, data->regions, gj, cfg.id_property);
      report.files_written.push_back(gj);
    }
    for (const PairResult& pr : lr.pairs) {
      if (!pr.bilisa) continue;
      emit_local_csv(*pr.bilisa, data->regions,
                     out_dir / ("bilisa_" + pr.label + "_" + ln + ".csv"), cfg,
                     report.files_written);
      std::string gj = (out_dir / ("bilisa_" + pr.label + "_" + ln + ".geojson")).string();
      emit_geojson(*pr.bilisa, data->regions, gj, cfg.id_property);
      report.files_written.push_back(gj);
    }
  }

  // Tables 6-7 shape: ANOVA of traits across clusters, per level
  for (const LevelReport& lr : report.levels) {
    const std::string ln = to_string(lr.level);
    std::vector<std::string> header{"trait"};
    for (const PairResult& pr : lr.pairs) {
      header.insert(header.end(), {pr.label + "_F", pr.label + "_p", pr.label + "_stars"});
    }
    detail::TableWriter table(out_dir / ("anova_" + ln + ".csv"), header, cfg,
                              report.files_written);
    for (const std::string& trait : cfg.traits) {
      std::vector<std::string> row{trait};
      for (const PairResult& pr : lr.pairs) {
        const ClusterAnova* found = nullptr;
        for (const ClusterAnova& ca : pr.anovas) {
          if (ca.trait == trait) found = &ca;
        }
        if (found) {
          std::string f = found->anova.infinite_f ? "inf" : format_double(found->anova.f);
          row.insert(row.end(),
                     {f, format_double(found->anova.p), significance_stars(found->anova.p)});
        } else {
          row.insert(row.end(), {"", "", ""});
        }
      }
      table.row(row);
    }

    // box-plot backing data (Figs 11-12)
    detail::TableWriter quartiles(out_dir / ("quartiles_" + ln + ".csv"),
                                  {"pair", "trait", "cluster", "n", "min", "q1", "median", "q3",
                                   "max"},
                                  cfg, report.files_written);
    for (const PairResult& pr : lr.pairs) {
      for (const ClusterAnova& ca : pr.anovas) {
        for (const QuartileSummary& qs : ca.quartiles) {
          quartiles.row({pr.label, ca.trait, to_string(qs.cluster), format_size(qs.n),
                         format_double(qs.minimum), format_double(qs.q1),
                         format_double(qs.median), format_double(qs.q3),
                         format_double(qs.maximum)});
        }
      }
    }
  }

  // Tables 8-9 shape: regression coefficients, stars in separate columns
  for (const LevelReport& lr : report.levels) {
    const std::string ln = to_string(lr.level);
    for (const RegressionBlock& block : lr.regressions) {
      std::vector<std::string> header{"term"};
      for (const ModelRun& run : block.models) {
        std::string m = "model" + std::to_string(run.model_id);
        header.insert(header.end(), {m + "_coef", m + "_stars"});
      }
      detail::TableWriter table(
          out_dir / ("regression_" + block.dataset + "_" + ln + ".csv"), header, cfg,
          report.files_written);
      std::vector<std::string> terms{"Constant"};
      for (const std::string& name : model_predictors(4)) terms.push_back(name);
      for (const std::string& term : terms) {
        std::vector<std::string> row{term};
        for (const ModelRun& run : block.models) {
          const RegressionTerm* found = nullptr;
          if (run.result) {
            for (const RegressionTerm& t : run.result->terms) {
              if (t.name == term) found = &t;
            }
          }
          if (found) {
            row.insert(row.end(), {format_double(found->coef), significance_stars(found->p)});
          } else {
            row.insert(row.end(), {"", ""});
          }
        }
        table.row(row);
      }
      for (const std::string metric : {"Adjusted R2", "R2", "N"}) {
        std::vector<std::string> row{metric};
        for (const ModelRun& run : block.models) {
          if (!run.result) {
            row.insert(row.end(), {"", ""});
            continue;
          }
          if (metric == "Adjusted R2") {
            row.insert(row.end(), {format_double(run.result->adj_r2), ""});
          } else if (metric == "R2") {
            row.insert(row.end(), {format_double(run.result->r2), ""});
          } else {
            row.insert(row.end(), {format_size(run.result->n), ""});
          }
        }
        table.row(row);
      }

      // long-form detail table: one row per (model, term)
      detail::TableWriter details(
          out_dir / ("regression_" + block.dataset + "_" + ln + "_details.csv"),
          {"model", "term", "coef", "se", "t", "p", "stars"}, cfg, report.files_written);
      for (const ModelRun& run : block.models) {
        if (!run.result) continue;
        for (const RegressionTerm& t : run.result->terms) {
          details.row({std::to_string(run.model_id), t.name, format_double(t.coef),
                       format_double(t.se), format_double(t.t), format_double(t.p),
                       significance_stars(t.p)});
        }
      }
    }
  }

  // diagnostics
  {
    detail::TableWriter table(out_dir / "diagnostics.csv", {"message"}, cfg,
                              report.files_written);
    for (const std::string& msg : report.diagnostics) table.row({msg});
  }

  // summary with config hash and the per-stage parameter block
  {
    nlohmann::json stages = nlohmann::json::object();
    stages["ingest"] = {{"id_property", cfg.id_property},
                        {"levels", nlohmann::json::array()}};
    for (const auto& [level, path] : cfg.geometry) {
      stages["ingest"]["levels"].push_back(to_string(level));
    }
    stages["filter"] = {{"date_start", cfg.date_start},
                        {"date_end", cfg.date_end},
                        {"baseline", cfg.baseline.categories},
                        {"expanded", cfg.expanded.categories}};
    stages["normalize"] = {{"denominator_column", cfg.denominator_column},
                           {"minmax", cfg.minmax},
                           {"disaggregate_damage", cfg.disaggregate_damage}};
    stages["weights"] = {{"adjacency", to_string(cfg.adjacency)},
                         {"scheme", to_string(cfg.scheme)},
                         {"snap", cfg.snap}};
    stages["inference"] = {{"permutations", cfg.permutations},
                           {"alpha", cfg.alpha},
                           {"seed", cfg.seed},
                           {"models", cfg.models}};
    nlohmann::json summary{{"config_hash", report.config_hash},
                           {"config", config_to_json(cfg)},
                           {"stages", stages},
                           {"reports_total", report.reports_total},
                           {"reports_in_window", report.reports_in_window},
                           {"diagnostics", report.diagnostics},
                           {"files", report.files_written}};
    std::filesystem::path path = out_dir / "audit_summary.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << summary.dump(2) << '\n';
    report.files_written.push_back(path.string());
  }

  return report;
}

}  // namespace floodaudit

// floodaudit command-line interface.
//
// Subcommands mirror the pipeline stages so each can be run standalone:
//   ingest-check, weights, moran, lisa, bilisa, anova, regress, synth,
//   and audit for the full run.
//
// Exit codes: 0 success, 2 validation error, 3 data error, 4 numeric error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "floodaudit/audit.hpp"
#include "floodaudit/csv.hpp"
#include "floodaudit/esda.hpp"
#include "floodaudit/geojson.hpp"
#include "floodaudit/infer.hpp"
#include "floodaudit/synth.hpp"
#include "floodaudit/transform.hpp"
#include "floodaudit/weights.hpp"

namespace fa = floodaudit;

namespace {

struct CommonOpts {
  std::string geometry;
  std::string attributes;
  std::string id_prop = "GEOID";
  std::string adjacency = "queen";
  std::string scheme = "binary";
  double snap = 0.0;
  std::size_t permutations = 999;
  std::uint64_t seed = 1;
  double alpha = 0.05;
};

fa::Adjacency parse_adjacency(const std::string& s) {
  if (s == "queen") return fa::Adjacency::queen;
  if (s == "rook") return fa::Adjacency::rook;
  throw fa::ConfigError("adjacency must be queen or rook");
}

fa::Scheme parse_scheme(const std::string& s) {
  if (s == "binary") return fa::Scheme::binary;
  if (s == "row" || s == "row_standardized") return fa::Scheme::row_standardized;
  throw fa::ConfigError("scheme must be binary or row");
}

fa::WeightMatrix build_weights(const fa::RegionSet& regions, const CommonOpts& opts) {
  fa::WeightMatrix w = fa::build_contiguity(regions, parse_adjacency(opts.adjacency), opts.snap);
  if (parse_scheme(opts.scheme) == fa::Scheme::row_standardized) w = fa::row_standardize(w);
  return w;
}

std::vector<double> load_column(const fa::RegionSet& regions, const std::string& attr_path,
                                const std::string& id_prop, const std::string& column) {
  fa::AttributeTable table =
      fa::parse_attributes_file(attr_path, id_prop).align_to(regions);
  return table.dense(column);
}

void add_common_stat_flags(CLI::App* cmd, CommonOpts& opts, bool with_attrs = true) {
  cmd->add_option("--geometry", opts.geometry, "GeoJSON FeatureCollection")->required();
  if (with_attrs) {
    cmd->add_option("--attributes", opts.attributes, "attribute CSV keyed by the id property")
        ->required();
  }
  cmd->add_option("--id-prop", opts.id_prop, "feature property holding the region id");
  cmd->add_option("--adjacency", opts.adjacency, "queen|rook")
      ->check(CLI::IsMember({"queen", "rook"}));
  cmd->add_option("--scheme", opts.scheme, "binary|row")
      ->check(CLI::IsMember({"binary", "row"}));
  cmd->add_option("--snap", opts.snap, "coordinate snap tolerance (0 = exact)");
}

void print_moran(const fa::MoranResult& res) {
  std::cout << "I = " << fa::format_double(res.moran_i)
            << "  E[I] = " << fa::format_double(res.expected);
  if (res.has_p) {
    std::cout << "  pseudo_p = " << fa::format_double(res.pseudo_p)
              << fa::significance_stars(res.pseudo_p) << "  (" << res.permutations
              << " permutations, seed " << res.seed << ")";
  }
  std::cout << "\n";
}

void print_cluster_counts(const fa::LocalMoranResult& res) {
  std::map<std::string, std::size_t> counts;
  for (fa::ClusterClass c : res.cluster) ++counts[fa::to_string(c)];
  for (const auto& [name, count] : counts) {
    std::cout << "  " << name << ": " << count << "\n";
  }
}

fa::PatchSpec parse_patch(const std::string& text) {
  fa::PatchSpec p;
  if (std::sscanf(text.c_str(), "%zu,%zu,%zu,%zu", &p.row0, &p.col0, &p.row1, &p.col1) != 4) {
    throw fa::ConfigError("patch must be row0,col0,row1,col1: " + text);
  }
  return p;
}

void write_attribute_csv(const std::string& path, const fa::AttributeTable& table,
                         const std::string& id_prop) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw fa::DataError("cannot write " + path);
  std::vector<std::string> header{id_prop};
  for (const std::string& name : table.column_names()) header.push_back(name);
  fa::write_csv_row(out, header);
  for (std::size_t i = 0; i < table.rows(); ++i) {
    std::vector<std::string> row{table.ids()[i]};
    for (const std::string& name : table.column_names()) {
      const fa::Column& col = table.column(name);
      row.push_back(col.missing[i] ? std::string() : fa::format_double(col.values[i]));
    }
    fa::write_csv_row(out, row);
  }
}

void write_reports_csv(const std::string& path, const std::vector<fa::ReportRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw fa::DataError("cannot write " + path);
  fa::write_csv_row(out, {"id", "category", "timestamp"});
  for (const fa::ReportRow& r : rows) {
    fa::write_csv_row(out, {r.region_id, r.category, r.timestamp});
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"floodaudit: bias audit for crowdsourced disaster-report data"};
  app.require_subcommand(1);

  // ---- ingest-check ----
  CommonOpts ingest_opts;
  auto* ingest = app.add_subcommand("ingest-check", "parse and validate inputs");
  ingest->add_option("--geometry", ingest_opts.geometry, "GeoJSON FeatureCollection")->required();
  ingest->add_option("--attributes", ingest_opts.attributes, "attribute CSV (optional)");
  ingest->add_option("--id-prop", ingest_opts.id_prop, "feature property holding the region id");
  ingest->callback([&] {
    fa::RegionSet regions = fa::parse_geometry_file(ingest_opts.geometry, ingest_opts.id_prop);
    std::size_t degenerate = 0;
    double total_area = 0.0;
    for (const fa::Region& r : regions.regions()) {
      degenerate += r.degenerate;
      total_area += r.area;
    }
    std::cout << "regions: " << regions.size() << "\n"
              << "total area: " << fa::format_double(total_area) << "\n"
              << "degenerate geometries: " << degenerate << "\n";
    if (!ingest_opts.attributes.empty()) {
      fa::AttributeTable table =
          fa::parse_attributes_file(ingest_opts.attributes, ingest_opts.id_prop)
              .align_to(regions);
      std::cout << "attribute columns:";
      for (const std::string& name : table.column_names()) {
        std::cout << ' ' << name;
        std::size_t miss = table.column(name).missing_count();
        if (miss) std::cout << "(missing:" << miss << ")";
      }
      std::cout << "\njoin: ok\n";
    }
  });

  // ---- weights ----
  CommonOpts weights_opts;
  std::string weights_out;
  auto* weights_cmd = app.add_subcommand("weights", "build contiguity weights");
  add_common_stat_flags(weights_cmd, weights_opts, /*with_attrs=*/false);
  weights_cmd->add_option("--out", weights_out, "write adjacency-list weights file");
  weights_cmd->callback([&] {
    fa::RegionSet regions = fa::parse_geometry_file(weights_opts.geometry, weights_opts.id_prop);
    fa::WeightMatrix w = build_weights(regions, weights_opts);
    std::cout << "n: " << w.n << "\nS0: " << fa::format_double(w.s0)
              << "\nislands: " << w.islands.size() << "\nscheme: " << fa::to_string(w.scheme)
              << "\n";
    if (!weights_out.empty()) {
      fa::write_weights_file(w, weights_out);
      std::cout << "wrote " << weights_out << "\n";
    }
  });

  // ---- moran ----
  CommonOpts moran_opts;
  std::string moran_column;
  auto* moran_cmd = app.add_subcommand("moran", "global Moran's I for one column");
  add_common_stat_flags(moran_cmd, moran_opts);
  moran_cmd->add_option("--column", moran_column, "attribute column to test")->required();
  moran_cmd->add_option("--permutations", moran_opts.permutations, "permutation count");
  moran_cmd->add_option("--seed", moran_opts.seed, "RNG seed");
  moran_cmd->callback([&] {
    fa::RegionSet regions = fa::parse_geometry_file(moran_opts.geometry, moran_opts.id_prop);
    fa::AttributeVector x(
        load_column(regions, moran_opts.attributes, moran_opts.id_prop, moran_column));
    fa::WeightMatrix w = build_weights(regions, moran_opts);
    print_moran(fa::global_moran(x, w, moran_opts.permutations, moran_opts.seed));
  });

  // ---- lisa ----
  CommonOpts lisa_opts;
  std::string lisa_column, lisa_csv, lisa_geojson;
  auto* lisa_cmd = app.add_subcommand("lisa", "local Moran cluster map for one column");
  add_common_stat_flags(lisa_cmd, lisa_opts);
  lisa_cmd->add_option("--column", lisa_column, "attribute column to test")->required();
  lisa_cmd->add_option("--permutations", lisa_opts.permutations, "permutation count");
  lisa_cmd->add_option("--seed", lisa_opts.seed, "RNG seed");
  lisa_cmd->add_option("--alpha", lisa_opts.alpha, "significance level");
  lisa_cmd->add_option("--out-csv", lisa_csv, "per-region CSV output");
  lisa_cmd->add_option("--out-geojson", lisa_geojson, "annotated GeoJSON output");
  lisa_cmd->callback([&] {
    fa::RegionSet regions = fa::parse_geometry_file(lisa_opts.geometry, lisa_opts.id_prop);
    fa::AttributeVector x(
        load_column(regions, lisa_opts.attributes, lisa_opts.id_prop, lisa_column));
    fa::WeightMatrix w = build_weights(regions, lisa_opts);
    fa::LisaResult res =
        fa::lisa(x, w, lisa_opts.permutations, lisa_opts.seed, lisa_opts.alpha);
    std::cout << "global I (from decomposition): " << fa::format_double(res.global) << "\n";
    print_cluster_counts(res);
    if (!lisa_csv.empty()) {
      fa::AuditConfig meta;
      meta.permutations = lisa_opts.permutations;
      meta.seed = lisa_opts.seed;
      meta.adjacency = parse_adjacency(lisa_opts.adjacency);
      meta.scheme = parse_scheme(lisa_opts.scheme);
      std::vector<std::string> files;
      fa::emit_local_csv(res, regions, lisa_csv, meta, files);
      std::cout << "wrote " << lisa_csv << "\n";
    }
    if (!lisa_geojson.empty()) {
      fa::emit_geojson(res, regions, lisa_geojson, lisa_opts.id_prop);
      std::cout << "wrote " << lisa_geojson << "\n";
    }
  });

  // ---- bilisa ----
  CommonOpts bilisa_opts;
  std::string bilisa_x, bilisa_y, bilisa_csv, bilisa_geojson;
  auto* bilisa_cmd =
      app.add_subcommand("bilisa", "bivariate local Moran: x against the lag of y");
  add_common_stat_flags(bilisa_cmd, bilisa_opts);
  bilisa_cmd->add_option("--x-column", bilisa_x, "own-value column")->required();
  bilisa_cmd->add_option("--y-column", bilisa_y, "lagged column")->required();
  bilisa_cmd->add_option("--permutations", bilisa_opts.permutations, "permutation count");
  bilisa_cmd->add_option("--seed", bilisa_opts.seed, "RNG seed");
  bilisa_cmd->add_option("--alpha", bilisa_opts.alpha, "significance level");
  bilisa_cmd->add_option("--out-csv", bilisa_csv, "per-region CSV output");
  bilisa_cmd->add_option("--out-geojson", bilisa_geojson, "annotated GeoJSON output");
  bilisa_cmd->callback([&] {
    fa::RegionSet regions = fa::parse_geometry_file(bilisa_opts.geometry, bilisa_opts.id_prop);
    fa::AttributeTable table =
        fa::parse_attributes_file(bilisa_opts.attributes, bilisa_opts.id_prop).align_to(regions);
    fa::AttributeVector x(table.dense(bilisa_x));
    fa::AttributeVector y(table.dense(bilisa_y));
    fa::WeightMatrix w = build_weights(regions, bilisa_opts);
    fa::BivariateResult res = fa::bilisa(x, y, w, bilisa_opts.permutations, bilisa_opts.seed,
                                         bilisa_opts.alpha);
    std::cout << "global bivariate I: " << fa::format_double(res.global) << "\n";
    print_cluster_counts(res);
    if (!bilisa_csv.empty()) {
      fa::AuditConfig meta;
      meta.permutations = bilisa_opts.permutations;
      meta.seed = bilisa_opts.seed;
      meta.adjacency = parse_adjacency(bilisa_opts.adjacency);
      meta.scheme = parse_scheme(bilisa_opts.scheme);
      std::vector<std::string> files;
      fa::emit_local_csv(res, regions, bilisa_csv, meta, files);
      std::cout << "wrote " << bilisa_csv << "\n";
    }
    if (!bilisa_geojson.empty()) {
      fa::emit_geojson(res, regions, bilisa_geojson, bilisa_opts.id_prop);
      std::cout << "wrote " << bilisa_geojson << "\n";
    }
  });

  // ---- anova ----
  std::string anova_table, anova_group;
  std::vector<std::string> anova_values;
  auto* anova_cmd = app.add_subcommand("anova", "one-way ANOVA across labeled groups");
  anova_cmd->add_option("--table", anova_table, "CSV with a group label column")->required();
  anova_cmd->add_option("--group-column", anova_group, "column holding group labels")->required();
  anova_cmd->add_option("--value-column", anova_values, "numeric column(s) to test")->required();
  anova_cmd->callback([&] {
    fa::CsvDocument doc = fa::read_csv_file(anova_table);
    std::size_t group_idx = doc.column_index(anova_group);
    for (const std::string& value_col : anova_values) {
      std::size_t value_idx = doc.column_index(value_col);
      std::map<std::string, std::vector<double>> by_group;
      for (const auto& row : doc.rows) {
        auto v = fa::parse_double(row[value_idx]);
        if (!v) {
          throw fa::DataError(value_col + ": non-numeric value '" + row[value_idx] + "'");
        }
        by_group[row[group_idx]].push_back(*v);
      }
      std::vector<std::pair<std::string, std::vector<double>>> groups(by_group.begin(),
                                                                      by_group.end());
      fa::AnovaResult res = fa::one_way_anova(groups);
      std::cout << value_col << ": F("
                << fa::format_double(res.df_between) << "," << fa::format_double(res.df_within)
                << ") = " << (res.infinite_f ? "inf" : fa::format_double(res.f))
                << ", p = " << fa::format_double(res.p) << fa::significance_stars(res.p) << "\n";
    }
  });

  // ---- regress ----
  std::string regress_table_path, regress_dependent;
  std::vector<int> regress_models{1, 2, 3, 4};
  std::string regress_id_prop = "GEOID";
  auto* regress_cmd = app.add_subcommand("regress", "OLS models 1-4 for a dependent column");
  regress_cmd->add_option("--table", regress_table_path, "attribute CSV")->required();
  regress_cmd->add_option("--dependent", regress_dependent, "dependent column")->required();
  regress_cmd->add_option("--model", regress_models, "model ids (default all)");
  regress_cmd->add_option("--id-prop", regress_id_prop, "id column name");
  regress_cmd->callback([&] {
    fa::AttributeTable table = fa::parse_attributes_file(regress_table_path, regress_id_prop);
    const std::vector<double>& y = table.dense(regress_dependent);
    for (int model_id : regress_models) {
      fa::Design design = fa::model_matrix(table, model_id);
      fa::RegressionResult res = fa::ols(y, design, model_id);
      std::cout << "Model " << model_id << " (N=" << res.n
                << ", R2=" << fa::format_double(res.r2)
                << ", adjR2=" << fa::format_double(res.adj_r2) << ")\n";
      for (const fa::RegressionTerm& t : res.terms) {
        std::cout << "  " << t.name << " = " << fa::format_double(t.coef)
                  << " (se " << fa::format_double(t.se) << ", t " << fa::format_double(t.t)
                  << ", p " << fa::format_double(t.p) << fa::significance_stars(t.p) << ")\n";
      }
    }
  });

  // ---- synth ----
  std::string synth_out;
  std::size_t synth_rows = 20, synth_cols = 20;
  std::uint64_t synth_seed = 1;
  double synth_rho = 0.6, synth_scale = 1.0, synth_lambda = 3.0, synth_patch_lambda = 25.0;
  std::vector<std::string> synth_lh, synth_hl;
  std::vector<std::string> synth_categories{"Flooding"};
  std::string synth_date = "2019-09-20";
  bool synth_nested = false;
  auto* synth_cmd = app.add_subcommand("synth", "generate a bias-injected synthetic fixture");
  synth_cmd->add_option("--out", synth_out, "output directory")->required();
  synth_cmd->add_option("--rows", synth_rows, "lattice rows");
  synth_cmd->add_option("--cols", synth_cols, "lattice cols");
  synth_cmd->add_option("--seed", synth_seed, "RNG seed");
  synth_cmd->add_option("--rho", synth_rho, "damage field autocorrelation in (-1,1)");
  synth_cmd->add_option("--damage-scale", synth_scale, "damage field scale");
  synth_cmd->add_option("--lambda", synth_lambda, "reports per unit damage");
  synth_cmd->add_option("--patch-lambda", synth_patch_lambda,
                        "forced report rate in LH patches");
  synth_cmd->add_option("--lh-patch", synth_lh, "low-damage/high-report patch r0,c0,r1,c1");
  synth_cmd->add_option("--hl-patch", synth_hl, "high-damage/low-report patch r0,c0,r1,c1");
  synth_cmd->add_option("--category", synth_categories, "report categories to spread rows over");
  synth_cmd->add_option("--date", synth_date, "report date (YYYY-MM-DD)");
  synth_cmd->add_flag("--nested", synth_nested,
                      "emit nested tract/block-group fixture (rows/cols are parent cells)");
  synth_cmd->callback([&] {
    std::filesystem::create_directories(synth_out);
    fa::BiasScenario scenario;
    scenario.seed = synth_seed;
    scenario.rho = synth_rho;
    scenario.damage_scale = synth_scale;
    scenario.base_lambda = synth_lambda;
    scenario.patch_report_lambda = synth_patch_lambda;
    scenario.categories = synth_categories;
    scenario.date = synth_date;
    for (const std::string& p : synth_lh) {
      scenario.low_damage_high_report.push_back(parse_patch(p));
    }
    for (const std::string& p : synth_hl) {
      scenario.high_damage_low_report.push_back(parse_patch(p));
    }

    auto out_path = [&](const char* name) {
      return (std::filesystem::path(synth_out) / name).string();
    };
    nlohmann::json config{
        {"seed", synth_seed},
        {"permutations", 999},
        {"alpha", 0.05},
        {"adjacency", "queen"},
        {"scheme", "binary"},
        {"id_property", "GEOID"},
        {"reports", {{"path", "reports.csv"},
                     {"date_start", synth_date},
                     {"date_end", synth_date}}},
        {"categories",
         {{"baseline", nlohmann::json::array({synth_categories.front()})},
          {"expanded", synth_categories}}},
        {"damage_column", "FEMA damage"},
        {"denominator_column", "Housing units"},
        {"traits", scenario.traits},
        {"models", {1, 2, 3, 4}},
        {"output_dir", "audit_out"},
    };

    if (!synth_nested) {
      scenario.lattice = {synth_rows, synth_cols, 1.0};
      fa::RegionSet regions = fa::make_lattice(scenario.lattice);
      fa::SynthData data = fa::generate_reports(scenario, regions);
      fa::write_geojson_file(fa::to_feature_collection(regions), out_path("geometry.geojson"));
      write_attribute_csv(out_path("attributes.csv"), data.attributes, "GEOID");
      write_reports_csv(out_path("reports.csv"), data.reports);
      std::ofstream truth(out_path("truth.csv"), std::ios::binary);
      fa::write_csv_row(truth, {"id", "truth"});
      for (std::size_t i = 0; i < regions.size(); ++i) {
        fa::write_csv_row(truth, {regions[i].id, fa::to_string(data.truth[i])});
      }
      config["geometry"] = {{"custom", "geometry.geojson"}};
      config["attributes"] = {{"custom", "attributes.csv"}};
    } else {
      fa::NestedLattice nested = fa::make_nested_lattice(synth_rows, synth_cols, 2.0);
      scenario.lattice = {2 * synth_rows, 2 * synth_cols, 1.0};
      fa::SynthData data = fa::generate_reports(scenario, nested.children);
      fa::Hierarchy h = fa::build_hierarchy(nested.children, nested.parents);

      // tract attributes: damage + sums/means aggregated from children
      fa::AttributeTable tract(nested.parents.ids());
      std::size_t np = nested.parents.size();
      auto aggregate = [&](const std::string& col, bool mean) {
        const std::vector<double>& child_vals = data.attributes.dense(col);
        std::vector<double> acc(np, 0.0);
        std::vector<double> cnt(np, 0.0);
        for (std::size_t c = 0; c < nested.children.size(); ++c) {
          acc[h.parent_of[c]] += child_vals[c];
          cnt[h.parent_of[c]] += 1.0;
        }
        if (mean) {
          for (std::size_t p = 0; p < np; ++p) acc[p] = cnt[p] > 0 ? acc[p] / cnt[p] : 0.0;
        }
        return acc;
      };
      tract.add_column("FEMA damage", aggregate("FEMA damage", false));
      tract.add_column("Population", aggregate("Population", false));
      tract.add_column("Housing units", aggregate("Housing units", false));
      for (const std::string& t : scenario.traits) tract.add_column(t, aggregate(t, true));

      // block-group attributes: no damage column; the audit derives it
      // by area-weighted disaggregation from the tract level
      fa::AttributeTable bg(nested.children.ids());
      for (const std::string& name : data.attributes.column_names()) {
        if (name == "FEMA damage") continue;
        bg.add_column(name, data.attributes.column(name).values);
      }

      fa::write_geojson_file(fa::to_feature_collection(nested.parents),
                             out_path("tracts.geojson"));
      fa::write_geojson_file(fa::to_feature_collection(nested.children),
                             out_path("block_groups.geojson"));
      write_attribute_csv(out_path("tract_attributes.csv"), tract, "GEOID");
      write_attribute_csv(out_path("block_group_attributes.csv"), bg, "GEOID");
      write_reports_csv(out_path("reports.csv"), data.reports);
      std::ofstream truth(out_path("truth.csv"), std::ios::binary);
      fa::write_csv_row(truth, {"id", "truth"});
      for (std::size_t i = 0; i < nested.children.size(); ++i) {
        fa::write_csv_row(truth, {nested.children[i].id, fa::to_string(data.truth[i])});
      }
      config["geometry"] = {{"tract", "tracts.geojson"},
                            {"block_group", "block_groups.geojson"}};
      config["attributes"] = {{"tract", "tract_attributes.csv"},
                              {"block_group", "block_group_attributes.csv"}};
      config["disaggregate_damage"] = true;
    }

    std::ofstream cfg_out(out_path("audit_config.json"), std::ios::binary);
    cfg_out << config.dump(2) << '\n';
    std::cout << "fixture written to " << synth_out << "\n";
  });

  // ---- audit ----
  std::string audit_config_path, audit_out, audit_adjacency, audit_scheme, audit_id_prop;
  std::uint64_t audit_seed = 0;
  bool audit_seed_given = false;
  std::size_t audit_permutations = 0, audit_threads = 0;
  bool audit_permutations_given = false, audit_threads_given = false;
  double audit_alpha = 0.0;
  bool audit_alpha_given = false;
  auto* audit_cmd = app.add_subcommand("audit", "run the full audit from a JSON config");
  audit_cmd->add_option("--config", audit_config_path, "audit config JSON")->required();
  audit_cmd->add_option("--out", audit_out, "override output directory");
  audit_cmd->add_option("--seed", audit_seed, "override seed")
      ->each([&](const std::string&) { audit_seed_given = true; });
  audit_cmd->add_option("--permutations", audit_permutations, "override permutation count")
      ->each([&](const std::string&) { audit_permutations_given = true; });
  audit_cmd->add_option("--alpha", audit_alpha, "override significance level")
      ->each([&](const std::string&) { audit_alpha_given = true; });
  audit_cmd->add_option("--adjacency", audit_adjacency, "override adjacency rule")
      ->check(CLI::IsMember({"queen", "rook"}));
  audit_cmd->add_option("--scheme", audit_scheme, "override weight scheme")
      ->check(CLI::IsMember({"binary", "row"}));
  audit_cmd->add_option("--id-prop", audit_id_prop, "override id property");
  audit_cmd->add_option("--threads", audit_threads, "worker threads (0 = hardware)")
      ->each([&](const std::string&) { audit_threads_given = true; });
  audit_cmd->callback([&] {
    fa::AuditConfig cfg = fa::load_audit_config(audit_config_path);
    if (!audit_out.empty()) cfg.output_dir = audit_out;
    if (audit_seed_given) {
      cfg.seed = audit_seed;
      cfg.seed_set = true;
    }
    if (audit_permutations_given) cfg.permutations = audit_permutations;
    if (audit_alpha_given) cfg.alpha = audit_alpha;
    if (!audit_adjacency.empty()) cfg.adjacency = parse_adjacency(audit_adjacency);
    if (!audit_scheme.empty()) cfg.scheme = parse_scheme(audit_scheme);
    if (!audit_id_prop.empty()) cfg.id_property = audit_id_prop;
    if (audit_threads_given) cfg.threads = audit_threads;
    fa::validate_audit_config(cfg);
    fa::AuditReport report = fa::run_audit(cfg);
    std::cout << "audit complete (config " << report.config_hash << ")\n"
              << "reports: " << report.reports_in_window << "/" << report.reports_total
              << " in window\n";
    for (const fa::LevelReport& lr : report.levels) {
      std::cout << fa::to_string(lr.level) << ": " << lr.n_regions << " regions, "
                << lr.islands.size() << " island(s)\n";
      for (const fa::DatasetResult& ds : lr.datasets) {
        std::cout << "  " << ds.name << ": ";
        if (ds.moran) {
          std::cout << "I=" << fa::format_double(ds.moran->moran_i)
                    << fa::significance_stars(ds.moran->pseudo_p) << ", "
                    << ds.significant_clusters << " significant cluster region(s)";
        } else {
          std::cout << ds.note;
        }
        std::cout << "\n";
      }
    }
    std::cout << report.files_written.size() << " file(s) in " << cfg.output_dir << "\n";
    if (!report.diagnostics.empty()) {
      std::cout << report.diagnostics.size() << " diagnostic(s); see diagnostics.csv\n";
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(fa::ExitCode::validation_error);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(fa::exit_code_for(e));
  }
  return 0;
}

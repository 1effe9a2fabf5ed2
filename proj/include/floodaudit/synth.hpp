#pragma once

// Synthetic geometry, spatially autocorrelated fields, and bias-injected
// report generators. These are the ground-truth oracles for end-to-end
// tests: every fixture is written through the same GeoJSON/CSV formats
// the ingest stage reads.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "floodaudit/attributes.hpp"
#include "floodaudit/csv.hpp"
#include "floodaudit/error.hpp"
#include "floodaudit/esda.hpp"
#include "floodaudit/region.hpp"
#include "floodaudit/rng.hpp"
#include "floodaudit/weights.hpp"

namespace floodaudit {

struct LatticeSpec {
  std::size_t rows = 0;
  std::size_t cols = 0;
  double cell_size = 1.0;
};

namespace detail {

inline Polygon square_cell(double x0, double y0, double size) {
  Polygon p;
  p.outer = {{x0, y0}, {x0 + size, y0}, {x0 + size, y0 + size}, {x0, y0 + size}, {x0, y0}};
  return p;
}

}  // namespace detail

// rows x cols unit squares, ids "r{i}c{j}", row-major order
inline RegionSet make_lattice(const LatticeSpec& spec) {
  if (spec.rows * spec.cols < 4) throw ConfigError("lattice needs rows*cols >= 4");
  if (!(spec.cell_size > 0.0)) throw ConfigError("lattice cell size must be positive");
  RegionSet set(Level::custom);
  for (std::size_t i = 0; i < spec.rows; ++i) {
    for (std::size_t j = 0; j < spec.cols; ++j) {
      Region r;
      r.id = "r" + std::to_string(i) + "c" + std::to_string(j);
      r.geometry.push_back(detail::square_cell(static_cast<double>(j) * spec.cell_size,
                                               static_cast<double>(i) * spec.cell_size,
                                               spec.cell_size));
      r.area = spec.cell_size * spec.cell_size;
      set.add(std::move(r));
    }
  }
  return set;
}

struct NestedLattice {
  RegionSet parents;   // parent_rows x parent_cols cells
  RegionSet children;  // each parent split into 2x2 quadrants
};

// Nested grids with census-style ids: fixed-width parent id, child id =
// parent id + one quadrant digit, so the prefix rule applies directly.
// Children are emitted in row-major order over the (2*rows x 2*cols)
// child grid, making the child set itself a regular lattice.
inline NestedLattice make_nested_lattice(std::size_t parent_rows, std::size_t parent_cols,
                                         double parent_cell = 2.0) {
  if (parent_rows * parent_cols < 1) throw ConfigError("nested lattice needs >= 1 parent");
  NestedLattice out;
  out.parents = RegionSet(Level::tract);
  out.children = RegionSet(Level::block_group);
  auto pad2 = [](std::size_t v) {
    std::string s = std::to_string(v);
    return s.size() < 2 ? "0" + s : s;
  };
  double half = parent_cell / 2.0;
  for (std::size_t i = 0; i < parent_rows; ++i) {
    for (std::size_t j = 0; j < parent_cols; ++j) {
      Region parent;
      parent.id = pad2(i) + pad2(j);
      parent.geometry.push_back(detail::square_cell(static_cast<double>(j) * parent_cell,
                                                    static_cast<double>(i) * parent_cell,
                                                    parent_cell));
      parent.area = parent_cell * parent_cell;
      out.parents.add(std::move(parent));
    }
  }
  for (std::size_t ci = 0; ci < 2 * parent_rows; ++ci) {
    for (std::size_t cj = 0; cj < 2 * parent_cols; ++cj) {
      std::size_t quadrant = (ci % 2) * 2 + (cj % 2);
      Region child;
      child.id = pad2(ci / 2) + pad2(cj / 2) + std::to_string(quadrant);
      child.geometry.push_back(detail::square_cell(static_cast<double>(cj) * half,
                                                   static_cast<double>(ci) * half, half));
      child.area = half * half;
      out.children.add(std::move(child));
    }
  }
  return out;
}

// x = (I - rho*W)^-1 eps with iid standard normal eps; the direct
// sparse solve keeps the construction exact and deterministic per seed.
inline std::vector<double> sar_field(const WeightMatrix& w, double rho, std::uint64_t seed) {
  if (!(std::fabs(rho) < 1.0)) throw NumericError("sar_field: |rho| must be < 1");
  Rng rng(seed);
  std::vector<double> eps(w.n);
  for (double& e : eps) e = rng.next_normal();
  if (rho == 0.0) return eps;

  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> triplets;
  triplets.reserve(w.n + static_cast<std::size_t>(w.s0) + 16);
  for (std::size_t i = 0; i < w.n; ++i) {
    triplets.emplace_back(static_cast<int>(i), static_cast<int>(i), 1.0);
    for (const auto& [j, weight] : w.neighbors[i]) {
      triplets.emplace_back(static_cast<int>(i), static_cast<int>(j), -rho * weight);
    }
  }
  Eigen::SparseMatrix<double> a(static_cast<int>(w.n), static_cast<int>(w.n));
  a.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> solver;
  solver.compute(a);
  if (solver.info() != Eigen::Success) throw NumericError("sar_field: singular system");
  Eigen::VectorXd rhs(w.n);
  for (std::size_t i = 0; i < w.n; ++i) rhs(static_cast<int>(i)) = eps[i];
  Eigen::VectorXd x = solver.solve(rhs);
  return std::vector<double>(x.data(), x.data() + w.n);
}

// Inclusive cell-index rectangle on a lattice.
struct PatchSpec {
  std::size_t row0 = 0, col0 = 0, row1 = 0, col1 = 0;

  bool contains(std::size_t r, std::size_t c) const {
    return r >= row0 && r <= row1 && c >= col0 && c <= col1;
  }
};

// Reifies the three bias mechanisms: reporting-access multipliers
// (demographic bias), patch overrides forcing damage/report imbalance
// (spatial bias), and report categories for filter experiments
// (sample bias).
struct BiasScenario {
  LatticeSpec lattice{20, 20, 1.0};
  std::uint64_t seed = 1;

  // damage field
  double rho = 0.6;
  double damage_scale = 1.0;

  // reporting process
  double base_lambda = 3.0;         // reports per unit damage
  double patch_report_lambda = 25;  // forced mean count in low-damage/high-report patches
  std::vector<double> access;       // per-region multiplier in [0,1]; empty = all 1

  std::vector<PatchSpec> low_damage_high_report;  // ground truth LH
  std::vector<PatchSpec> high_damage_low_report;  // ground truth HL

  std::vector<std::string> categories = {"Flooding"};
  std::vector<std::string> traits = {"Poverty%", "NOEDU%", "Single parent household%",
                                     "Minority%"};
  std::string shifted_trait = "Minority%";
  double trait_shift = 0.5;  // added inside LH patches

  std::string date = "2019-09-20";
};

struct SynthData {
  std::vector<ReportRow> reports;
  std::vector<ClusterClass> truth;  // LH / HL inside patches, not_significant elsewhere
  std::vector<double> damage;
  std::vector<std::uint64_t> counts;
  AttributeTable attributes;  // damage, Population, Housing units, traits
};

inline void validate_scenario(const BiasScenario& s) {
  for (double a : s.access) {
    if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("scenario access multiplier outside [0,1]");
  }
  auto overlaps = [](const PatchSpec& a, const PatchSpec& b) {
    return a.row0 <= b.row1 && b.row0 <= a.row1 && a.col0 <= b.col1 && b.col0 <= a.col1;
  };
  std::vector<PatchSpec> all = s.low_damage_high_report;
  all.insert(all.end(), s.high_damage_low_report.begin(), s.high_damage_low_report.end());
  for (std::size_t a = 0; a < all.size(); ++a) {
    for (std::size_t b = a + 1; b < all.size(); ++b) {
      if (overlaps(all[a], all[b])) throw ConfigError("scenario patches overlap");
    }
  }
  if (s.categories.empty()) throw ConfigError("scenario needs at least one report category");
}

inline SynthData generate_reports(const BiasScenario& scenario, const RegionSet& regions) {
  validate_scenario(scenario);
  const std::size_t rows = scenario.lattice.rows, cols = scenario.lattice.cols;
  if (regions.size() != rows * cols) {
    throw DataError("generate_reports: region set does not match the scenario lattice");
  }
  const std::size_t n = regions.size();

  // spatially smooth nonnegative damage surface
  WeightMatrix w = row_standardize(build_contiguity(regions, Adjacency::queen));
  std::vector<double> field = sar_field(w, scenario.rho, scenario.seed);
  std::vector<double> damage(n);
  for (std::size_t i = 0; i < n; ++i) {
    damage[i] = std::exp(scenario.damage_scale * field[i]);
  }
  std::vector<double> sorted_damage = damage;
  std::sort(sorted_damage.begin(), sorted_damage.end());
  const double low_damage = sorted_damage[static_cast<std::size_t>(0.05 * (n - 1))];
  const double high_damage = sorted_damage[static_cast<std::size_t>(0.95 * (n - 1))];

  SynthData out;
  out.truth.assign(n, ClusterClass::not_significant);
  out.counts.assign(n, 0);

  auto cell_of = [cols](std::size_t idx) {
    return std::pair<std::size_t, std::size_t>{idx / cols, idx % cols};
  };

  for (std::size_t i = 0; i < n; ++i) {
    auto [r, c] = cell_of(i);
    for (const PatchSpec& p : scenario.low_damage_high_report) {
      if (p.contains(r, c)) {
        damage[i] = low_damage;
        out.truth[i] = ClusterClass::low_high;
      }
    }
    for (const PatchSpec& p : scenario.high_damage_low_report) {
      if (p.contains(r, c)) {
        damage[i] = high_damage;
        out.truth[i] = ClusterClass::high_low;
      }
    }
  }
  out.damage = damage;

  // report counts: Poisson(base_lambda * damage * access), overridden in
  // the injected patches
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = Rng::stream(scenario.seed, 0x5E9075ULL, i);
    double access = scenario.access.empty() ? 1.0 : scenario.access[i];
    double lambda = scenario.base_lambda * damage[i] * access;
    if (out.truth[i] == ClusterClass::low_high) {
      lambda = scenario.patch_report_lambda;
    } else if (out.truth[i] == ClusterClass::high_low) {
      lambda = 0.0;  // no means to report
    }
    out.counts[i] = rng.next_poisson(lambda);
  }

  // one row per report, category round-robin from a seeded stream
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = Rng::stream(scenario.seed, 0xca7e90feULL, i);
    for (std::uint64_t k = 0; k < out.counts[i]; ++k) {
      const std::string& cat =
          scenario.categories[rng.next_below(scenario.categories.size())];
      out.reports.push_back(ReportRow{regions[i].id, cat, scenario.date + "T12:00:00"});
    }
  }

  // demographic surface: iid uniform traits, shifted inside LH patches
  AttributeTable table(regions.ids());
  table.add_column("FEMA damage", damage);
  std::vector<double> population(n), housing(n);
  {
    Rng rng = Rng::stream(scenario.seed, 0x9090ULL, 0);
    for (std::size_t i = 0; i < n; ++i) {
      population[i] = 500.0 + rng.next_double() * 4500.0;
      housing[i] = population[i] / 2.5;
    }
  }
  table.add_column("Population", std::move(population));
  table.add_column("Housing units", std::move(housing));
  for (std::size_t t = 0; t < scenario.traits.size(); ++t) {
    Rng rng = Rng::stream(scenario.seed, 0x77A17ULL + 17 * (t + 1), 0);
    std::vector<double> trait(n);
    for (std::size_t i = 0; i < n; ++i) {
      trait[i] = rng.next_double();
      if (scenario.traits[t] == scenario.shifted_trait &&
          out.truth[i] == ClusterClass::low_high) {
        trait[i] += scenario.trait_shift;
      }
    }
    table.add_column(scenario.traits[t], std::move(trait));
  }
  out.attributes = std::move(table);
  return out;
}

}  // namespace floodaudit

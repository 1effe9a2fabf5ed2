#pragma once

// One-way ANOVA across cluster categories and the four OLS regression
// models relating reporting volume to demographics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "floodaudit/attributes.hpp"
#include "floodaudit/error.hpp"
#include "floodaudit/esda.hpp"
#include "floodaudit/special.hpp"

namespace floodaudit {

// Table footnote convention: * p < 0.05, ** p < 0.01, *** p < 0.001.
inline const char* significance_stars(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  return "";
}

struct GroupSummary {
  std::string label;
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  // sample variance; 0 for singleton groups
};

struct AnovaResult {
  double f = 0.0;
  bool infinite_f = false;  // zero within-variance with unequal means
  double df_between = 0.0;
  double df_within = 0.0;
  double p = 1.0;
  std::vector<GroupSummary> groups;
  double pooled_within_variance = 0.0;
};

inline AnovaResult one_way_anova(
    const std::vector<std::pair<std::string, std::vector<double>>>& groups) {
  if (groups.size() < 2) throw NumericError("one_way_anova: needs at least 2 groups");
  std::size_t total_n = 0;
  double grand_sum = 0.0;
  for (const auto& [label, values] : groups) {
    if (values.empty()) throw NumericError("one_way_anova: group '" + label + "' is empty");
    total_n += values.size();
    for (double v : values) grand_sum += v;
  }
  const std::size_t k = groups.size();
  if (total_n <= k) {
    throw NumericError("one_way_anova: zero within-group degrees of freedom "
                       "(all groups are singletons)");
  }
  const double grand_mean = grand_sum / static_cast<double>(total_n);

  AnovaResult res;
  res.df_between = static_cast<double>(k - 1);
  res.df_within = static_cast<double>(total_n - k);

  double ssb = 0.0, ssw = 0.0;
  for (const auto& [label, values] : groups) {
    double sum = 0.0;
    for (double v : values) sum += v;
    double mean = sum / static_cast<double>(values.size());
    double within = 0.0;
    for (double v : values) within += (v - mean) * (v - mean);
    ssb += static_cast<double>(values.size()) * (mean - grand_mean) * (mean - grand_mean);
    ssw += within;
    GroupSummary g;
    g.label = label;
    g.n = values.size();
    g.mean = mean;
    g.variance = values.size() > 1 ? within / static_cast<double>(values.size() - 1) : 0.0;
    res.groups.push_back(std::move(g));
  }
  res.pooled_within_variance = ssw / res.df_within;

  if (ssb == 0.0) {
    res.f = 0.0;
    res.p = 1.0;
    return res;
  }
  if (ssw == 0.0) {
    res.f = std::numeric_limits<double>::infinity();
    res.infinite_f = true;
    res.p = 0.0;
    return res;
  }
  res.f = (ssb / res.df_between) / (ssw / res.df_within);
  res.p = 1.0 - f_cdf(res.f, res.df_between, res.df_within);
  return res;
}

// Design matrix: intercept column plus named predictors, column-major.
struct Design {
  std::vector<std::string> names;            // predictor names, no intercept
  std::vector<std::vector<double>> columns;  // one vector per predictor
  std::size_t rows() const { return columns.empty() ? 0 : columns[0].size(); }
};

struct RegressionTerm {
  std::string name;  // "Constant" for the intercept
  double coef = 0.0;
  double se = 0.0;
  double t = 0.0;
  double p = 1.0;
};

struct RegressionResult {
  int model_id = 0;
  std::vector<RegressionTerm> terms;  // intercept first
  double r2 = 0.0;
  double adj_r2 = 0.0;
  std::vector<double> fitted;
  std::vector<double> residuals;
  std::size_t n = 0;
};

// Least squares through column-pivoted Householder QR; standard errors
// from sigma^2 (X'X)^-1, two-sided p from Student-t on n-k-1 df.
inline RegressionResult ols(std::span<const double> y, const Design& design, int model_id = 0) {
  const std::size_t n = y.size();
  const std::size_t k = design.names.size();
  if (design.columns.size() != k) throw DataError("ols: design names/columns mismatch");
  for (const auto& col : design.columns) {
    if (col.size() != n) throw DataError("ols: design column length != y length");
  }
  if (n <= k + 1) {
    throw NumericError("ols: N=" + std::to_string(n) + " too small for " + std::to_string(k) +
                       " predictors plus intercept");
  }

  Eigen::MatrixXd X(n, k + 1);
  Eigen::VectorXd yv(n);
  for (std::size_t r = 0; r < n; ++r) {
    X(r, 0) = 1.0;
    yv(r) = y[r];
  }
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t r = 0; r < n; ++r) X(r, c + 1) = design.columns[c][r];
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < static_cast<Eigen::Index>(k + 1)) {
    // pivot order puts the dependent columns last; name the culprits
    const auto& perm = qr.colsPermutation().indices();
    std::ostringstream msg;
    msg << "ols: design matrix is rank deficient; collinear columns:";
    for (Eigen::Index pos = qr.rank(); pos < perm.size(); ++pos) {
      Eigen::Index col = perm(pos);
      msg << ' ' << (col == 0 ? std::string("Constant") : design.names[col - 1]);
    }
    throw NumericError(msg.str());
  }

  Eigen::VectorXd beta = qr.solve(yv);
  Eigen::VectorXd fitted = X * beta;
  Eigen::VectorXd resid = yv - fitted;

  const double df = static_cast<double>(n - k - 1);
  const double sse = resid.squaredNorm();
  const double sigma2 = sse / df;
  Eigen::MatrixXd xtx_inv = (X.transpose() * X).ldlt().solve(
      Eigen::MatrixXd::Identity(k + 1, k + 1));

  double y_mean = yv.mean();
  double sst = (yv.array() - y_mean).matrix().squaredNorm();
  if (sst <= 0.0) throw NumericError("ols: dependent variable has zero variance");

  RegressionResult res;
  res.model_id = model_id;
  res.n = n;
  res.r2 = 1.0 - sse / sst;
  res.adj_r2 = 1.0 - (1.0 - res.r2) * (static_cast<double>(n - 1) / df);
  res.fitted.assign(fitted.data(), fitted.data() + n);
  res.residuals.assign(resid.data(), resid.data() + n);
  for (std::size_t c = 0; c <= k; ++c) {
    RegressionTerm term;
    term.name = c == 0 ? "Constant" : design.names[c - 1];
    term.coef = beta(c);
    term.se = std::sqrt(sigma2 * xtx_inv(c, c));
    term.t = term.se > 0.0 ? term.coef / term.se : 0.0;
    term.p = term.se > 0.0 ? 2.0 * (1.0 - t_cdf(std::fabs(term.t), df)) : 1.0;
    res.terms.push_back(std::move(term));
  }
  return res;
}

// Canonical column names for the four models.
namespace model_columns {
inline constexpr const char* population = "Population";
inline constexpr const char* damage = "FEMA damage";
inline constexpr const char* poverty = "Poverty%";
inline constexpr const char* noedu = "NOEDU%";
inline constexpr const char* noedu_alias = "NOHSDP%";  // same variable, alternate header
inline constexpr const char* single_parent = "Single parent household%";
inline constexpr const char* minority = "Minority%";
}  // namespace model_columns

inline std::vector<std::string> model_predictors(int model_id) {
  using namespace model_columns;
  switch (model_id) {
    case 1: return {population};
    case 2: return {population, damage};
    case 3: return {poverty, noedu, single_parent, minority};
    case 4: return {population, damage, poverty, noedu, single_parent, minority};
    default: throw ConfigError("model id must be 1, 2, 3, or 4");
  }
}

// Resolve a model's predictors from the table (NOEDU%/NOHSDP% treated
// as one variable) and keep the canonical names for reporting.
inline Design model_matrix(const AttributeTable& table, int model_id) {
  Design design;
  for (const std::string& name : model_predictors(model_id)) {
    std::string source = name;
    if (!table.has_column(source) && name == model_columns::noedu &&
        table.has_column(model_columns::noedu_alias)) {
      source = model_columns::noedu_alias;
    }
    if (!table.has_column(source)) {
      throw DataError("model " + std::to_string(model_id) + ": missing column '" + name + "'");
    }
    design.names.push_back(name);
    design.columns.push_back(table.dense(source));
  }
  return design;
}

struct QuartileSummary {
  ClusterClass cluster = ClusterClass::not_significant;
  std::size_t n = 0;
  double minimum = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, maximum = 0.0;
};

struct ClusterAnova {
  std::string trait;
  AnovaResult anova;
  std::vector<QuartileSummary> quartiles;  // box-plot backing data
};

namespace detail {

inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.size() == 1) return sorted[0];
  double h = q * static_cast<double>(sorted.size() - 1);
  std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace detail

// ANOVA of each trait across the significant BI-LISA clusters. A region
// joins its cluster's group only when it carries one of the four core
// classes; not-significant regions and islands are excluded.
inline std::vector<ClusterAnova> anova_over_clusters(const LocalMoranResult& clusters,
                                                     const AttributeTable& traits,
                                                     const std::vector<std::string>& trait_names) {
  constexpr ClusterClass kCore[] = {ClusterClass::high_high, ClusterClass::low_low,
                                    ClusterClass::high_low, ClusterClass::low_high};
  std::vector<std::vector<std::size_t>> members(4);
  for (std::size_t i = 0; i < clusters.cluster.size(); ++i) {
    for (std::size_t c = 0; c < 4; ++c) {
      if (clusters.cluster[i] == kCore[c]) members[c].push_back(i);
    }
  }
  std::size_t populated = 0;
  for (const auto& m : members) populated += !m.empty();
  if (populated < 2) {
    throw NumericError("anova_over_clusters: fewer than 2 populated cluster classes");
  }

  std::vector<ClusterAnova> out;
  for (const std::string& trait : trait_names) {
    const std::vector<double>& values = traits.dense(trait);
    if (values.size() != clusters.cluster.size()) {
      throw DataError("anova_over_clusters: trait '" + trait + "' not aligned with clusters");
    }
    ClusterAnova entry;
    entry.trait = trait;
    std::vector<std::pair<std::string, std::vector<double>>> groups;
    for (std::size_t c = 0; c < 4; ++c) {
      if (members[c].empty()) continue;
      std::vector<double> g;
      g.reserve(members[c].size());
      for (std::size_t i : members[c]) g.push_back(values[i]);

      std::vector<double> sorted = g;
      std::sort(sorted.begin(), sorted.end());
      QuartileSummary qs;
      qs.cluster = kCore[c];
      qs.n = sorted.size();
      qs.minimum = sorted.front();
      qs.q1 = detail::quantile_sorted(sorted, 0.25);
      qs.median = detail::quantile_sorted(sorted, 0.5);
      qs.q3 = detail::quantile_sorted(sorted, 0.75);
      qs.maximum = sorted.back();
      entry.quartiles.push_back(qs);

      groups.emplace_back(to_string(kCore[c]), std::move(g));
    }
    entry.anova = one_way_anova(groups);
    out.push_back(std::move(entry));
  }
  return out;
}

}  // namespace floodaudit

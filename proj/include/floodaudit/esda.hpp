#pragma once

// Global Moran's I, local Moran (LISA), and bivariate local Moran with
// permutation pseudo p-values and cluster classification.
//
// Conventions, applied uniformly:
//   - deviations z_i = x_i - mean(x); m2 = sum(z^2)/n
//   - global I = (n/S0) * sum_ij w_ij z_i z_j / sum_i z_i^2
//   - local I_i = (z_i/m2) * sum_j w_ij z_j, so sum_i I_i = S0 * I
//   - bivariate I_i = (zx_i/m2x) * sum_j w_ij zy_j; its global form is
//     sum_i I_i / S0, which collapses to the univariate I when y == x
//   - pseudo p = (extreme + 1)/(permutations + 1), one-sided on the
//     observed side: "extreme" counts permuted values >= the observed
//     one when the observed lies at or above the permutation mean,
//     <= otherwise
//   - global inference permutes the whole vector; local inference holds
//     region i fixed and draws its neighbor values from the other n-1
//   - islands get lag 0, no p-value, and the island class
//
// All randomness is counter-seeded per (seed, region, permutation), so
// permutation loops can run on any number of threads without changing
// a single bit of output.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "floodaudit/error.hpp"
#include "floodaudit/parallel.hpp"
#include "floodaudit/rng.hpp"
#include "floodaudit/weights.hpp"

namespace floodaudit {

// Centered attribute values; rejects degenerate (zero-variance) input.
struct AttributeVector {
  std::vector<double> values;
  std::vector<double> z;
  double mean = 0.0;
  double m2 = 0.0;  // sum z^2 / n

  explicit AttributeVector(std::vector<double> v) : values(std::move(v)) {
    if (values.empty()) throw NumericError("attribute vector is empty");
    double sum = 0.0;
    for (double x : values) {
      if (!std::isfinite(x)) throw NumericError("attribute vector contains non-finite values");
      sum += x;
    }
    mean = sum / static_cast<double>(values.size());
    z.reserve(values.size());
    double zsq = 0.0;
    for (double x : values) {
      z.push_back(x - mean);
      zsq += (x - mean) * (x - mean);
    }
    m2 = zsq / static_cast<double>(values.size());
    if (m2 <= 0.0) throw NumericError("degenerate variance: all values equal");
  }

  std::size_t size() const { return values.size(); }
};

enum class ClusterClass { high_high, low_low, high_low, low_high, not_significant, island };

inline const char* to_string(ClusterClass c) {
  switch (c) {
    case ClusterClass::high_high: return "HH";
    case ClusterClass::low_low: return "LL";
    case ClusterClass::high_low: return "HL";
    case ClusterClass::low_high: return "LH";
    case ClusterClass::not_significant: return "not_significant";
    default: return "island";
  }
}

// Sign-quadrant rule gated by significance; exact zeros in either the
// own deviation or the lag stay unclassified.
inline ClusterClass classify_cluster(double z_own, double lag, double pseudo_p, double alpha) {
  if (!(pseudo_p <= alpha)) return ClusterClass::not_significant;
  if (z_own == 0.0 || lag == 0.0) return ClusterClass::not_significant;
  if (z_own > 0.0) return lag > 0.0 ? ClusterClass::high_high : ClusterClass::high_low;
  return lag < 0.0 ? ClusterClass::low_low : ClusterClass::low_high;
}

struct MoranResult {
  double moran_i = 0.0;
  double expected = 0.0;  // -1/(n-1)
  double pseudo_p = std::numeric_limits<double>::quiet_NaN();
  bool has_p = false;
  std::size_t permutations = 0;
  std::uint64_t seed = 0;
};

struct LocalMoranResult {
  std::vector<double> local;    // I_i
  std::vector<double> lag;      // sum_j w_ij z_j (of y for the bivariate test)
  std::vector<double> pseudo_p; // NaN for islands
  std::vector<ClusterClass> cluster;
  double global = 0.0;  // sum_i I_i / S0
  std::size_t permutations = 0;
  std::uint64_t seed = 0;
  double alpha = 0.05;
};

using LisaResult = LocalMoranResult;
using BivariateResult = LocalMoranResult;

namespace detail {

constexpr std::uint64_t kGlobalStream = ~0ULL;

inline void check_sizes(const AttributeVector& x, const WeightMatrix& w) {
  if (x.size() != w.n) {
    throw DataError("attribute vector has " + std::to_string(x.size()) +
                    " values, weights have n=" + std::to_string(w.n));
  }
}

inline double cross_product_sum(const WeightMatrix& w, const std::vector<double>& a,
                                const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < w.n; ++i) {
    double ai = a[i];
    if (ai == 0.0) continue;
    double row = 0.0;
    for (const auto& [j, weight] : w.neighbors[i]) row += weight * b[j];
    acc += ai * row;
  }
  return acc;
}

inline double pseudo_p_from_counts(double observed, double perm_sum, std::size_t count_ge,
                                   std::size_t count_le, std::size_t permutations) {
  double perm_mean = perm_sum / static_cast<double>(permutations);
  std::size_t extreme = observed >= perm_mean ? count_ge : count_le;
  return static_cast<double>(extreme + 1) / static_cast<double>(permutations + 1);
}

}  // namespace detail

inline MoranResult global_moran(const AttributeVector& x, const WeightMatrix& w,
                                std::size_t permutations, std::uint64_t seed) {
  detail::check_sizes(x, w);
  if (x.size() < 3) throw DataError("global Moran's I needs at least 3 regions");
  if (w.s0 <= 0.0) throw NumericError("S0 is zero: every region is an island");

  const std::size_t n = x.size();
  const double zsq = x.m2 * static_cast<double>(n);
  const double scale = static_cast<double>(n) / (w.s0 * zsq);

  MoranResult res;
  res.moran_i = scale * detail::cross_product_sum(w, x.z, x.z);
  res.expected = -1.0 / static_cast<double>(n - 1);
  res.permutations = permutations;
  res.seed = seed;
  if (permutations == 0) return res;

  double perm_sum = 0.0;
  std::size_t count_ge = 0, count_le = 0;
  std::vector<double> shuffled(x.z);
  for (std::size_t p = 0; p < permutations; ++p) {
    Rng rng = Rng::stream(seed, detail::kGlobalStream, p);
    std::copy(x.z.begin(), x.z.end(), shuffled.begin());
    rng.shuffle(shuffled);
    double stat = scale * detail::cross_product_sum(w, shuffled, shuffled);
    perm_sum += stat;
    if (stat >= res.moran_i) ++count_ge;
    if (stat <= res.moran_i) ++count_le;
  }
  res.pseudo_p =
      detail::pseudo_p_from_counts(res.moran_i, perm_sum, count_ge, count_le, permutations);
  res.has_p = true;
  return res;
}

// Shared engine for the univariate and bivariate local tests: own
// deviation from x, lag over y. lisa() passes y == x.
inline LocalMoranResult local_moran(const AttributeVector& x, const AttributeVector& y,
                                    const WeightMatrix& w, std::size_t permutations,
                                    std::uint64_t seed, double alpha,
                                    std::size_t threads = 1) {
  detail::check_sizes(x, w);
  detail::check_sizes(y, w);
  if (permutations < 1) throw ConfigError("local Moran needs permutations >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0,1)");

  const std::size_t n = x.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();

  LocalMoranResult res;
  res.local.assign(n, 0.0);
  res.lag.assign(n, 0.0);
  res.pseudo_p.assign(n, nan);
  res.cluster.assign(n, ClusterClass::not_significant);
  res.permutations = permutations;
  res.seed = seed;
  res.alpha = alpha;

  parallel_for(0, n, threads, [&](std::size_t i) {
    if (w.is_island(i)) {
      res.cluster[i] = ClusterClass::island;
      return;
    }
    const auto& row = w.neighbors[i];
    double lag = 0.0;
    for (const auto& [j, weight] : row) lag += weight * y.z[j];
    const double own_scale = x.z[i] / x.m2;
    const double observed = own_scale * lag;
    res.lag[i] = lag;
    res.local[i] = observed;

    // pool of candidate neighbor values: everything except y_i
    std::vector<double> pool;
    pool.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) pool.push_back(y.z[j]);
    }
    const std::size_t m = pool.size();
    const std::size_t k = row.size();
    std::vector<std::size_t> drawn(k);

    double perm_sum = 0.0;
    std::size_t count_ge = 0, count_le = 0;
    for (std::size_t p = 0; p < permutations; ++p) {
      Rng rng = Rng::stream(seed, i, p);
      // partial Fisher-Yates: draw k distinct values, then undo so the
      // pool is pristine for the next permutation
      double perm_lag = 0.0;
      for (std::size_t t = 0; t < k; ++t) {
        std::size_t j = t + static_cast<std::size_t>(rng.next_below(m - t));
        std::swap(pool[t], pool[j]);
        drawn[t] = j;
        perm_lag += row[t].second * pool[t];
      }
      for (std::size_t t = k; t-- > 0;) std::swap(pool[t], pool[drawn[t]]);

      double stat = own_scale * perm_lag;
      perm_sum += stat;
      if (stat >= observed) ++count_ge;
      if (stat <= observed) ++count_le;
    }
    res.pseudo_p[i] =
        detail::pseudo_p_from_counts(observed, perm_sum, count_ge, count_le, permutations);
    res.cluster[i] = classify_cluster(x.z[i], lag, res.pseudo_p[i], alpha);
  });

  if (w.s0 > 0.0) {
    double total = 0.0;
    for (double v : res.local) total += v;
    res.global = total / w.s0;
  }
  return res;
}

inline LisaResult lisa(const AttributeVector& x, const WeightMatrix& w,
                       std::size_t permutations, std::uint64_t seed, double alpha,
                       std::size_t threads = 1) {
  return local_moran(x, x, w, permutations, seed, alpha, threads);
}

inline BivariateResult bilisa(const AttributeVector& x, const AttributeVector& y,
                              const WeightMatrix& w, std::size_t permutations,
                              std::uint64_t seed, double alpha, std::size_t threads = 1) {
  if (x.size() != y.size()) throw DataError("bivariate inputs differ in length");
  return local_moran(x, y, w, permutations, seed, alpha, threads);
}

}  // namespace floodaudit

#pragma once

// Contiguity-based spatial weights. Queen adjacency links regions
// sharing at least one boundary vertex, rook requires a shared edge.
// Matrices are immutable once built and safe to share across threads.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "floodaudit/error.hpp"
#include "floodaudit/numfmt.hpp"
#include "floodaudit/region.hpp"

namespace floodaudit {

enum class Scheme { binary, row_standardized };
enum class Adjacency { queen, rook };

inline const char* to_string(Scheme s) {
  return s == Scheme::binary ? "binary" : "row_standardized";
}
inline const char* to_string(Adjacency a) { return a == Adjacency::queen ? "queen" : "rook"; }

struct WeightMatrix {
  std::size_t n = 0;
  // per region, (neighbor index, weight), sorted by neighbor index
  std::vector<std::vector<std::pair<std::uint32_t, double>>> neighbors;
  Scheme scheme = Scheme::binary;
  double s0 = 0.0;  // sum of all weights
  std::vector<std::uint32_t> islands;

  std::size_t degree(std::size_t i) const { return neighbors[i].size(); }
  bool is_island(std::size_t i) const { return neighbors[i].empty(); }

  void finalize() {
    s0 = 0.0;
    islands.clear();
    for (std::size_t i = 0; i < n; ++i) {
      auto& row = neighbors[i];
      std::sort(row.begin(), row.end());
      if (row.empty()) islands.push_back(static_cast<std::uint32_t>(i));
      for (const auto& [j, w] : row) s0 += w;
    }
  }
};

namespace detail {

// coordinate key: exact bits when snap == 0, snapped grid index otherwise
struct VertexKey {
  std::int64_t x, y;
  bool operator==(const VertexKey&) const = default;
};

struct VertexKeyHash {
  std::size_t operator()(const VertexKey& k) const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint64_t v) {
      h ^= v;
      h *= 0x100000001b3ULL;
    };
    mix(static_cast<std::uint64_t>(k.x));
    mix(static_cast<std::uint64_t>(k.y));
    return static_cast<std::size_t>(h);
  }
};

inline std::int64_t snap_coord(double v, double snap) {
  if (snap > 0.0) return static_cast<std::int64_t>(std::llround(v / snap));
  return std::bit_cast<std::int64_t>(v == 0.0 ? 0.0 : v);  // normalize -0.0
}

inline VertexKey vertex_key(const Point& p, double snap) {
  return {snap_coord(p.x, snap), snap_coord(p.y, snap)};
}

struct EdgeKey {
  VertexKey a, b;  // normalized: a <= b lexicographically
  bool operator==(const EdgeKey&) const = default;
};

struct EdgeKeyHash {
  std::size_t operator()(const EdgeKey& k) const {
    VertexKeyHash vh;
    return vh(k.a) * 0x9e3779b97f4a7c15ULL + vh(k.b);
  }
};

inline EdgeKey edge_key(const Point& p, const Point& q, double snap) {
  VertexKey a = vertex_key(p, snap), b = vertex_key(q, snap);
  if (std::tie(b.x, b.y) < std::tie(a.x, a.y)) std::swap(a, b);
  return {a, b};
}

template <typename Key, typename Hash>
WeightMatrix from_shared_keys(const RegionSet& regions,
                              std::unordered_map<Key, std::vector<std::uint32_t>, Hash>& owners) {
  WeightMatrix w;
  w.n = regions.size();
  w.neighbors.assign(w.n, {});
  std::vector<std::set<std::uint32_t>> adj(w.n);
  for (auto& [key, list] : owners) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    for (std::size_t a = 0; a < list.size(); ++a) {
      for (std::size_t b = a + 1; b < list.size(); ++b) {
        adj[list[a]].insert(list[b]);
        adj[list[b]].insert(list[a]);
      }
    }
  }
  for (std::size_t i = 0; i < w.n; ++i) {
    for (std::uint32_t j : adj[i]) w.neighbors[i].emplace_back(j, 1.0);
  }
  w.scheme = Scheme::binary;
  w.finalize();
  return w;
}

template <typename Fn>
void for_each_ring(const Region& region, Fn&& fn) {
  for (const Polygon& poly : region.geometry) {
    fn(poly.outer);
    for (const Ring& h : poly.holes) fn(h);
  }
}

}  // namespace detail

inline WeightMatrix build_contiguity(const RegionSet& regions, Adjacency rule,
                                     double snap = 0.0) {
  if (regions.empty()) throw DataError("cannot build weights for an empty region set");
  if (rule == Adjacency::queen) {
    std::unordered_map<detail::VertexKey, std::vector<std::uint32_t>, detail::VertexKeyHash>
        owners;
    for (std::size_t i = 0; i < regions.size(); ++i) {
      detail::for_each_ring(regions[i], [&](const Ring& ring) {
        // skip the closing duplicate vertex
        for (std::size_t k = 0; k + 1 < ring.size(); ++k) {
          owners[detail::vertex_key(ring[k], snap)].push_back(static_cast<std::uint32_t>(i));
        }
      });
    }
    return detail::from_shared_keys(regions, owners);
  }
  std::unordered_map<detail::EdgeKey, std::vector<std::uint32_t>, detail::EdgeKeyHash> owners;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    detail::for_each_ring(regions[i], [&](const Ring& ring) {
      for (std::size_t k = 0; k + 1 < ring.size(); ++k) {
        owners[detail::edge_key(ring[k], ring[k + 1], snap)].push_back(
            static_cast<std::uint32_t>(i));
      }
    });
  }
  return detail::from_shared_keys(regions, owners);
}

// Divide each non-island row by its degree; islands stay empty.
inline WeightMatrix row_standardize(const WeightMatrix& w) {
  if (w.scheme != Scheme::binary) throw NumericError("row_standardize expects binary weights");
  WeightMatrix out = w;
  out.scheme = Scheme::row_standardized;
  for (auto& row : out.neighbors) {
    if (row.empty()) continue;
    double d = static_cast<double>(row.size());
    for (auto& [j, weight] : row) weight = 1.0 / d;
  }
  out.finalize();
  return out;
}

// Symmetric closure of an undirected edge list; test/fixture constructor.
inline WeightMatrix from_edge_list(std::size_t n,
                                   const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges) {
  WeightMatrix w;
  w.n = n;
  w.neighbors.assign(n, {});
  std::vector<std::set<std::uint32_t>> adj(n);
  for (auto [i, j] : edges) {
    if (i >= n || j >= n) {
      throw DataError("edge (" + std::to_string(i) + "," + std::to_string(j) +
                      ") out of range for n=" + std::to_string(n));
    }
    if (i == j) throw DataError("self-loop at index " + std::to_string(i));
    adj[i].insert(j);
    adj[j].insert(i);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::uint32_t j : adj[i]) w.neighbors[i].emplace_back(j, 1.0);
  }
  w.scheme = Scheme::binary;
  w.finalize();
  return w;
}

// Plain-text adjacency list: header "n", one "i j w" line per directed
// entry; decimal rendering is round-trip exact.
inline void write_weights(const WeightMatrix& w, std::ostream& out) {
  out << w.n << '\n';
  for (std::size_t i = 0; i < w.n; ++i) {
    for (const auto& [j, weight] : w.neighbors[i]) {
      out << i << ' ' << j << ' ' << format_double(weight) << '\n';
    }
  }
}

inline void write_weights_file(const WeightMatrix& w, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  write_weights(w, out);
}

inline WeightMatrix read_weights(std::istream& in, const std::string& what = "weights") {
  WeightMatrix w;
  std::string line;
  if (!std::getline(in, line)) throw DataError(what + ": empty weights document");
  {
    std::istringstream hdr(line);
    if (!(hdr >> w.n)) throw DataError(what + ": bad header line '" + line + "'");
  }
  w.neighbors.assign(w.n, {});
  bool all_unit = true;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::size_t i, j;
    std::string wtext;
    if (!(ls >> i >> j >> wtext)) {
      throw DataError(what + ": bad entry at line " + std::to_string(lineno));
    }
    auto weight = parse_double(wtext);
    if (!weight || i >= w.n || j >= w.n) {
      throw DataError(what + ": bad entry at line " + std::to_string(lineno));
    }
    if (i == j) throw DataError(what + ": self-neighbor at line " + std::to_string(lineno));
    if (*weight != 1.0) all_unit = false;
    w.neighbors[i].emplace_back(static_cast<std::uint32_t>(j), *weight);
  }
  w.scheme = all_unit ? Scheme::binary : Scheme::row_standardized;
  w.finalize();
  return w;
}

inline WeightMatrix read_weights_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return read_weights(in, path);
}

}  // namespace floodaudit

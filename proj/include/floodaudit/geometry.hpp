#pragma once

// Planar polygon primitives: shoelace areas, containment, centroids.
// Coordinates are taken as given; any consistent planar (ideally
// equal-area projected) system works because downstream math only uses
// area ratios within one file.

#include <cmath>
#include <cstddef>
#include <vector>

namespace floodaudit {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// closed ring: first point == last point
using Ring = std::vector<Point>;

struct Polygon {
  Ring outer;
  std::vector<Ring> holes;
};

using MultiPolygon = std::vector<Polygon>;

inline double ring_signed_area(const Ring& ring) {
  double acc = 0.0;
  if (ring.size() < 2) return 0.0;
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    acc += ring[i].x * ring[i + 1].y - ring[i + 1].x * ring[i].y;
  }
  return 0.5 * acc;
}

inline double ring_area(const Ring& ring) { return std::fabs(ring_signed_area(ring)); }

// outer minus holes, floored at zero (a hole larger than its shell is
// degenerate input; the caller flags area == 0)
inline double polygon_area(const Polygon& poly) {
  double a = ring_area(poly.outer);
  for (const Ring& h : poly.holes) a -= ring_area(h);
  return a > 0.0 ? a : 0.0;
}

inline double multipolygon_area(const MultiPolygon& mp) {
  double a = 0.0;
  for (const Polygon& p : mp) a += polygon_area(p);
  return a;
}

// even-odd ray cast; boundary points count as inside
inline bool point_in_ring(const Point& pt, const Ring& ring) {
  bool inside = false;
  std::size_t n = ring.size();
  if (n < 4) return false;
  for (std::size_t i = 0, j = n - 2; i + 1 < n; j = i++) {
    const Point& a = ring[i];
    const Point& b = ring[j];
    if ((a.y > pt.y) != (b.y > pt.y)) {
      double t = (b.x - a.x) * (pt.y - a.y) / (b.y - a.y) + a.x;
      if (pt.x < t) inside = !inside;
    }
  }
  return inside;
}

inline bool point_in_polygon(const Point& pt, const Polygon& poly) {
  if (!point_in_ring(pt, poly.outer)) return false;
  for (const Ring& h : poly.holes) {
    if (point_in_ring(pt, h)) return false;
  }
  return true;
}

inline bool point_in_multipolygon(const Point& pt, const MultiPolygon& mp) {
  for (const Polygon& p : mp) {
    if (point_in_polygon(pt, p)) return true;
  }
  return false;
}

// area-weighted centroid over outer rings; falls back to the first
// vertex for zero-area geometry
inline Point representative_point(const MultiPolygon& mp) {
  // sum of centroid*area terms: Cx*A = sum (x_i + x_{i+1}) * cross / 6
  double sx = 0.0, sy = 0.0, atotal = 0.0;
  for (const Polygon& p : mp) {
    const Ring& r = p.outer;
    if (r.size() < 4) continue;
    for (std::size_t i = 0; i + 1 < r.size(); ++i) {
      double cross = r[i].x * r[i + 1].y - r[i + 1].x * r[i].y;
      sx += (r[i].x + r[i + 1].x) * cross / 6.0;
      sy += (r[i].y + r[i + 1].y) * cross / 6.0;
      atotal += 0.5 * cross;
    }
  }
  if (atotal != 0.0) return {sx / atotal, sy / atotal};
  for (const Polygon& p : mp) {
    if (!p.outer.empty()) return p.outer.front();
  }
  return {0.0, 0.0};
}

}  // namespace floodaudit

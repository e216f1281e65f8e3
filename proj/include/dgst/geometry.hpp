#pragma once

// Quadrilateral primitives shared by label rendering, box extraction and
// evaluation. Coordinates are pixels with y pointing down; "counter-clockwise"
// means a positive shoelace sum, which is the order (0,0)(1,0)(1,1)(0,1).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "dgst/error.hpp"

namespace dgst {

inline constexpr double kAreaEpsilon = 1e-9;
inline constexpr double kBoundaryTolerance = 1e-9;

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Point a, Point b) = default;
};

constexpr double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }

inline bool is_finite(Point p) { return std::isfinite(p.x) && std::isfinite(p.y); }

struct Quad {
  std::array<Point, 4> v{};

  friend bool operator==(const Quad&, const Quad&) = default;
};

/// Distances from a point to the supporting lines of a quad's four edges.
/// The width pair measures across the long axis, the height pair across the
/// short one, so span_w equals the width of a rectangle and span_h its height.
struct EdgeDistances {
  double d_left = 0.0;
  double d_right = 0.0;
  double d_top = 0.0;
  double d_bottom = 0.0;

  double span_w() const { return d_left + d_right; }
  double span_h() const { return d_top + d_bottom; }
};

namespace detail {

template <typename Range>
double shoelace(const Range& pts) {
  double s = 0.0;
  const std::size_t n = std::size(pts);
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = pts[i];
    const Point& b = pts[(i + 1) % n];
    s += a.x * b.y - b.x * a.y;
  }
  return 0.5 * s;
}

inline int orientation(Point a, Point b, Point c) {
  const double c2 = cross(b - a, c - a);
  const double scale = std::max({norm(b - a) * norm(c - a), 1.0});
  if (c2 > 1e-12 * scale) return 1;
  if (c2 < -1e-12 * scale) return -1;
  return 0;
}

inline bool on_segment(Point a, Point b, Point p) {
  return std::min(a.x, b.x) - 1e-12 <= p.x && p.x <= std::max(a.x, b.x) + 1e-12 &&
         std::min(a.y, b.y) - 1e-12 <= p.y && p.y <= std::max(a.y, b.y) + 1e-12;
}

inline bool segments_intersect(Point a, Point b, Point c, Point d) {
  const int o1 = orientation(a, b, c);
  const int o2 = orientation(a, b, d);
  const int o3 = orientation(c, d, a);
  const int o4 = orientation(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

inline double point_segment_distance(Point p, Point a, Point b) {
  const Point ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return norm(p - a);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return norm(p - (a + t * ab));
}

// Signed distance of p from the directed line a->b; positive on the left
// (interior side of a counter-clockwise polygon).
inline double signed_line_distance(Point p, Point a, Point b) {
  return cross(b - a, p - a) / norm(b - a);
}

using Triangle = std::array<Point, 3>;

// Splits a simple CCW quad into two CCW triangles along an interior diagonal.
inline std::array<Triangle, 2> triangulate(const Quad& q) {
  std::size_t pivot = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    const Point prev = q.v[(i + 3) % 4];
    const Point cur = q.v[i];
    const Point next = q.v[(i + 1) % 4];
    if (cross(cur - prev, next - cur) < 0.0) {
      pivot = i;  // reflex vertex; the diagonal from it is always interior
      break;
    }
  }
  const Point a = q.v[pivot];
  const Point b = q.v[(pivot + 1) % 4];
  const Point c = q.v[(pivot + 2) % 4];
  const Point d = q.v[(pivot + 3) % 4];
  return {Triangle{a, b, c}, Triangle{a, c, d}};
}

inline bool point_in_triangle(Point p, const Triangle& t) {
  for (std::size_t i = 0; i < 3; ++i) {
    const Point a = t[i];
    const Point b = t[(i + 1) % 3];
    if (a == b) continue;
    if (signed_line_distance(p, a, b) < -kBoundaryTolerance) return false;
  }
  return true;
}

// Sutherland-Hodgman: clips `subject` against the convex CCW polygon `clip`.
inline std::vector<Point> clip_convex(std::vector<Point> subject, std::span<const Point> clip) {
  const std::size_t m = clip.size();
  for (std::size_t i = 0; i < m && !subject.empty(); ++i) {
    const Point a = clip[i];
    const Point b = clip[(i + 1) % m];
    std::vector<Point> out;
    out.reserve(subject.size() + 2);
    const std::size_t n = subject.size();
    for (std::size_t j = 0; j < n; ++j) {
      const Point p = subject[j];
      const Point q = subject[(j + 1) % n];
      const double dp = cross(b - a, p - a);
      const double dq = cross(b - a, q - a);
      if (dp >= 0.0) out.push_back(p);
      if ((dp >= 0.0) != (dq >= 0.0)) {
        const double s = dp / (dp - dq);
        out.push_back(p + s * (q - p));
      }
    }
    subject = std::move(out);
  }
  return subject;
}

inline double triangle_overlap(const Triangle& a, const Triangle& b) {
  const std::vector<Point> poly = clip_convex({a.begin(), a.end()}, b);
  if (poly.size() < 3) return 0.0;
  return std::max(0.0, shoelace(poly));
}

}  // namespace detail

/// Signed shoelace area; positive for counter-clockwise vertex order.
/// Throws DegenerateQuad when the magnitude is below 1e-9 px².
inline double polygon_area(const Quad& q) {
  const double a = detail::shoelace(q.v);
  if (!(std::abs(a) >= kAreaEpsilon)) throw DegenerateQuad("quad area below 1e-9 px^2");
  return a;
}

inline bool is_simple(const Quad& q) {
  using detail::segments_intersect;
  return !segments_intersect(q.v[0], q.v[1], q.v[2], q.v[3]) &&
         !segments_intersect(q.v[1], q.v[2], q.v[3], q.v[0]);
}

/// Builds a Quad in canonical order: counter-clockwise, starting from the
/// vertex with the smallest y (then x). Rejects non-finite, self-intersecting
/// and zero-area input.
inline Quad make_quad(std::array<Point, 4> pts) {
  for (const Point& p : pts) {
    if (!is_finite(p)) throw DegenerateQuad("non-finite vertex");
  }
  for (std::size_t i = 0; i < 4; ++i) {
    if (pts[i] == pts[(i + 1) % 4]) throw DegenerateQuad("repeated vertex");
  }
  Quad q{pts};
  const double a = polygon_area(q);
  if (a < 0.0) std::reverse(q.v.begin(), q.v.end());
  if (!is_simple(q)) throw DegenerateQuad("self-intersecting quad");
  const auto first = std::min_element(q.v.begin(), q.v.end(), [](Point l, Point r) {
    return l.y < r.y || (l.y == r.y && l.x < r.x);
  });
  std::rotate(q.v.begin(), first, q.v.end());
  return q;
}

inline Quad axis_rect(double x0, double y0, double x1, double y1) {
  return make_quad({Point{x0, y0}, Point{x1, y0}, Point{x1, y1}, Point{x0, y1}});
}

/// Boundary-inclusive containment with 1e-9 px tolerance. Works for
/// non-convex simple quads.
inline bool point_in_quad(Point p, const Quad& q) {
  const auto tris = detail::triangulate(q);
  return detail::point_in_triangle(p, tris[0]) || detail::point_in_triangle(p, tris[1]);
}

namespace detail {

inline EdgeDistances edge_distances_unchecked(Point p, const Quad& q) {
  std::array<double, 4> len{};
  std::array<double, 4> dist{};
  for (std::size_t i = 0; i < 4; ++i) {
    const Point a = q.v[i];
    const Point b = q.v[(i + 1) % 4];
    len[i] = norm(b - a);
    dist[i] = std::abs(signed_line_distance(p, a, b));
  }
  if (len[0] + len[2] >= len[1] + len[3]) return {dist[3], dist[1], dist[0], dist[2]};
  return {dist[0], dist[2], dist[1], dist[3]};
}

}  // namespace detail

/// Perpendicular distances from `p` to each edge's supporting line.
///
/// Opposite edges are paired: (v0v1, v2v3) and (v1v2, v3v0). The pair with
/// the larger mean length runs along the text direction; the distances to the
/// *other* pair measure position across the width (d_left/d_right) and the
/// distances to this pair measure position across the height (d_top/d_bottom).
/// Ties go to v0v1 as the long pair.
inline EdgeDistances edge_distances(Point p, const Quad& q) {
  if (!point_in_quad(p, q)) throw OutsideQuad("point is outside the quad");
  return detail::edge_distances_unchecked(p, q);
}

/// Moves every vertex inward along both of its edges by `r` times the length
/// of the shorter incident edge.
inline Quad shrink_quad(const Quad& q, double r) {
  if (!(r >= 0.0 && r < 0.5)) throw std::invalid_argument("shrink ratio must be in [0, 0.5)");
  if (r == 0.0) return q;
  std::array<Point, 4> out{};
  for (std::size_t i = 0; i < 4; ++i) {
    const Point cur = q.v[i];
    const Point to_next = q.v[(i + 1) % 4] - cur;
    const Point to_prev = q.v[(i + 3) % 4] - cur;
    const double ln = norm(to_next);
    const double lp = norm(to_prev);
    const double offset = r * std::min(ln, lp);
    out[i] = cur + offset * ((1.0 / ln) * to_next + (1.0 / lp) * to_prev);
  }
  const Quad raw{out};
  if (!(detail::shoelace(raw.v) >= kAreaEpsilon)) throw DegenerateQuad("shrink collapsed the quad");
  return make_quad(out);
}

/// Area of the intersection of two simple quads (exact up to rounding; each
/// quad is split into two triangles and the pieces clipped pairwise).
inline double intersection_area(const Quad& a, const Quad& b) {
  const auto ta = detail::triangulate(a);
  const auto tb = detail::triangulate(b);
  double s = 0.0;
  for (const auto& x : ta) {
    for (const auto& y : tb) s += detail::triangle_overlap(x, y);
  }
  return s;
}

inline double polygon_iou(const Quad& a_in, const Quad& b_in) {
  // Fixed operand order keeps the result bit-symmetric.
  const auto key = [](const Quad& q) {
    std::array<double, 8> k;
    for (std::size_t i = 0; i < 4; ++i) k[2 * i] = q.v[i].x, k[2 * i + 1] = q.v[i].y;
    return k;
  };
  const bool swap = key(b_in) < key(a_in);
  const Quad& a = swap ? b_in : a_in;
  const Quad& b = swap ? a_in : b_in;
  const double inter = intersection_area(a, b);
  const double uni = std::abs(detail::shoelace(a.v)) + std::abs(detail::shoelace(b.v)) - inter;
  if (!(uni > 0.0) || !(inter > 0.0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

/// Smallest distance between two quads; 0 when they touch or overlap.
inline double quad_distance(const Quad& a, const Quad& b) {
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      if (detail::segments_intersect(a.v[i], a.v[(i + 1) % 4], b.v[j], b.v[(j + 1) % 4])) return 0.0;
    }
  }
  if (point_in_quad(a.v[0], b) || point_in_quad(b.v[0], a)) return 0.0;
  double best = INFINITY;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      best = std::min(best, detail::point_segment_distance(a.v[i], b.v[j], b.v[(j + 1) % 4]));
      best = std::min(best, detail::point_segment_distance(b.v[i], a.v[j], a.v[(j + 1) % 4]));
    }
  }
  return best;
}

/// Andrew's monotone chain. Returns the CCW hull without collinear points.
inline std::vector<Point> convex_hull(std::span<const Point> pts) {
  std::vector<Point> p(pts.begin(), pts.end());
  std::sort(p.begin(), p.end(), [](Point a, Point b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  p.erase(std::unique(p.begin(), p.end()), p.end());
  if (p.size() < 3) return p;
  std::vector<Point> h(2 * p.size());
  std::size_t k = 0;
  for (const Point& pt : p) {
    while (k >= 2 && cross(h[k - 1] - h[k - 2], pt - h[k - 2]) <= 0.0) --k;
    h[k++] = pt;
  }
  for (std::size_t i = p.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(h[k - 1] - h[k - 2], p[i] - h[k - 2]) <= 0.0) --k;
    h[k++] = p[i];
  }
  h.resize(k - 1);
  return h;
}

/// Minimum-area enclosing rectangle: one side of the optimum is collinear
/// with a hull edge, so every hull edge direction is tried.
inline Quad min_area_rect(std::span<const Point> pts) {
  if (pts.size() < 3) throw DegenerateInput("need at least 3 points");
  const std::vector<Point> hull = convex_hull(pts);
  if (hull.size() < 3 || detail::shoelace(hull) < kAreaEpsilon) throw DegenerateInput("points are collinear");

  double best_area = INFINITY;
  std::array<Point, 4> best{};
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Point e = hull[(i + 1) % hull.size()] - hull[i];
    const Point u = (1.0 / norm(e)) * e;
    const Point n{-u.y, u.x};
    double umin = INFINITY, umax = -INFINITY, nmin = INFINITY, nmax = -INFINITY;
    for (const Point& h : hull) {
      const double pu = dot(h, u);
      const double pn = dot(h, n);
      umin = std::min(umin, pu);
      umax = std::max(umax, pu);
      nmin = std::min(nmin, pn);
      nmax = std::max(nmax, pn);
    }
    const double area = (umax - umin) * (nmax - nmin);
    if (area < best_area) {
      best_area = area;
      best = {umin * u + nmin * n, umax * u + nmin * n, umax * u + nmax * n, umin * u + nmax * n};
    }
  }
  return make_quad(best);
}

}  // namespace dgst

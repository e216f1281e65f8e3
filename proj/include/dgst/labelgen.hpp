#pragma once

// Soft text score maps. Inside a text box a pixel's intensity is the mean of
// two centerline closeness terms, one across the width and one across the
// height; background pixels are 0. Each scene is rendered twice, once with
// the original boxes and once with boxes contracted by the shrink ratio.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "dgst/geometry.hpp"

namespace dgst {

inline constexpr double kDefaultShrink = 0.2;

template <typename T>
struct BasicScoreMap {
  int width = 0;
  int height = 0;
  std::vector<T> values;  // row-major, top row first

  BasicScoreMap() = default;
  BasicScoreMap(int w, int h, T fill = T{0})
      : width(w), height(h), values(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

  std::size_t size() const { return values.size(); }
  T& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
  const T& at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }

  friend bool operator==(const BasicScoreMap&, const BasicScoreMap&) = default;
};

using ScoreMap = BasicScoreMap<float>;

template <typename T>
struct BasicScoreMapPair {
  BasicScoreMap<T> map_full;
  BasicScoreMap<T> map_shrunk;
  double shrink_r = kDefaultShrink;
};

using ScoreMapPair = BasicScoreMapPair<float>;

struct TextBox {
  Quad quad;
  std::string transcript;
  bool ignore = false;
};

struct AnnotatedScene {
  int width = 0;
  int height = 0;
  std::vector<TextBox> boxes;
};

namespace detail {

inline double soft_score_unchecked(Point p, const Quad& q) {
  const EdgeDistances d = edge_distances_unchecked(p, q);
  const double sw = d.span_w();
  const double sh = d.span_h();
  const double dw = sw > 0.0 ? 1.0 - std::abs(d.d_right - d.d_left) / sw : 0.0;
  const double dh = sh > 0.0 ? 1.0 - std::abs(d.d_bottom - d.d_top) / sh : 0.0;
  return std::clamp(0.5 * (dw + dh), 0.0, 1.0);
}

}  // namespace detail

/// Soft score of a point inside `q`. The width and height spans are the sums
/// of opposite-edge distances, which equal the box sides for rectangles and
/// keep the score in [0,1] for general quads.
inline double soft_score(Point p, const Quad& q) {
  if (!point_in_quad(p, q)) throw OutsideQuad("soft_score: point is outside the quad");
  return detail::soft_score_unchecked(p, q);
}

/// Splats the soft score of `q` into `map` with per-pixel max, sampling at
/// pixel centers. `q` is given relative to the integer pixel offset (ox, oy),
/// so the arithmetic never sees absolute coordinates.
template <typename T>
void splat_quad(BasicScoreMap<T>& map, const Quad& q, int ox = 0, int oy = 0) {
  double xmin = q.v[0].x, xmax = q.v[0].x, ymin = q.v[0].y, ymax = q.v[0].y;
  for (const Point& p : q.v) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  const int x0 = std::max(0, ox + static_cast<int>(std::floor(xmin - 0.5)));
  const int x1 = std::min(map.width - 1, ox + static_cast<int>(std::ceil(xmax - 0.5)));
  const int y0 = std::max(0, oy + static_cast<int>(std::floor(ymin - 0.5)));
  const int y1 = std::min(map.height - 1, oy + static_cast<int>(std::ceil(ymax - 0.5)));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const Point c{(x - ox) + 0.5, (y - oy) + 0.5};
      if (!point_in_quad(c, q)) continue;
      const T v = static_cast<T>(detail::soft_score_unchecked(c, q));
      T& dst = map.at(x, y);
      if (v > dst) dst = v;
    }
  }
}

/// Renders one score map with every box contracted by `r`. Boxes that
/// collapse under the contraction contribute nothing. Ignore boxes are
/// rendered like any other box.
template <typename T = float>
BasicScoreMap<T> render_score_map(const AnnotatedScene& scene, double r) {
  if (scene.width <= 0 || scene.height <= 0) throw std::invalid_argument("scene dimensions must be positive");
  BasicScoreMap<T> map(scene.width, scene.height);
  for (const TextBox& box : scene.boxes) {
    // Work in a frame anchored at the box's integer corner; integer shifts
    // are exact, so translated scenes render bit-identical maps.
    double fx = box.quad.v[0].x, fy = box.quad.v[0].y;
    for (const Point& p : box.quad.v) fx = std::min(fx, p.x), fy = std::min(fy, p.y);
    const int ox = static_cast<int>(std::floor(fx)), oy = static_cast<int>(std::floor(fy));
    Quad local = box.quad;
    for (Point& p : local.v) p = {p.x - ox, p.y - oy};
    Quad q;
    try {
      q = shrink_quad(local, r);
    } catch (const DegenerateQuad&) {
      continue;
    }
    splat_quad(map, q, ox, oy);
  }
  return map;
}

template <typename T = float>
BasicScoreMapPair<T> gen_label_pair(const AnnotatedScene& scene, double r = kDefaultShrink) {
  return {render_score_map<T>(scene, 0.0), render_score_map<T>(scene, r), r};
}

}  // namespace dgst

#pragma once

// Independent reference implementations used only by tests. None of these
// share code paths with the library routines they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <queue>
#include <random>
#include <vector>

#include "dgst/geometry.hpp"

namespace oracle {

// Even-odd ray casting, no tolerance.
inline bool inside(dgst::Point p, const dgst::Quad& q) {
  bool in = false;
  for (std::size_t i = 0, j = 3; i < 4; j = i++) {
    const auto& a = q.v[i];
    const auto& b = q.v[j];
    if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) in = !in;
  }
  return in;
}

// IoU estimated by sampling a grid x grid lattice over the joint bounding box.
inline double raster_iou(const dgst::Quad& a, const dgst::Quad& b, int grid = 512) {
  double x0 = INFINITY, y0 = INFINITY, x1 = -INFINITY, y1 = -INFINITY;
  for (const auto* q : {&a, &b}) {
    for (const auto& p : q->v) {
      x0 = std::min(x0, p.x);
      y0 = std::min(y0, p.y);
      x1 = std::max(x1, p.x);
      y1 = std::max(y1, p.y);
    }
  }
  long inter = 0, uni = 0;
  for (int j = 0; j < grid; ++j) {
    for (int i = 0; i < grid; ++i) {
      const dgst::Point p{x0 + (i + 0.5) * (x1 - x0) / grid, y0 + (j + 0.5) * (y1 - y0) / grid};
      const bool ia = inside(p, a);
      const bool ib = inside(p, b);
      inter += ia && ib;
      uni += ia || ib;
    }
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

// Minimum-area rectangle by scanning orientations in [0, 90) degrees with a
// fine step followed by local refinement.
inline double brute_min_rect_area(const std::vector<dgst::Point>& pts, double* best_angle = nullptr) {
  auto area_at = [&](double th) {
    const double c = std::cos(th), s = std::sin(th);
    double umin = INFINITY, umax = -INFINITY, vmin = INFINITY, vmax = -INFINITY;
    for (const auto& p : pts) {
      const double u = c * p.x + s * p.y;
      const double v = -s * p.x + c * p.y;
      umin = std::min(umin, u);
      umax = std::max(umax, u);
      vmin = std::min(vmin, v);
      vmax = std::max(vmax, v);
    }
    return (umax - umin) * (vmax - vmin);
  };
  double best = INFINITY, arg = 0;
  const int steps = 90 * 200;
  for (int k = 0; k < steps; ++k) {
    const double th = k * (std::numbers::pi / 2) / steps;
    const double a = area_at(th);
    if (a < best) {
      best = a;
      arg = th;
    }
  }
  double lo = arg - (std::numbers::pi / 2) / steps, hi = arg + (std::numbers::pi / 2) / steps;
  for (int it = 0; it < 200; ++it) {
    const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
    if (area_at(m1) < area_at(m2)) hi = m2; else lo = m1;
  }
  best = std::min(best, area_at(0.5 * (lo + hi)));
  if (best_angle) *best_angle = 0.5 * (lo + hi);
  return best;
}

// BFS flood fill component count.
inline int flood_fill_count(const std::vector<std::uint8_t>& bits, int w, int h, int connectivity) {
  std::vector<char> seen(bits.size(), 0);
  int count = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      if (!bits[i] || seen[i]) continue;
      ++count;
      std::queue<std::pair<int, int>> q;
      q.push({x, y});
      seen[i] = 1;
      while (!q.empty()) {
        const auto [cx, cy] = q.front();
        q.pop();
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            if (connectivity == 4 && dx != 0 && dy != 0) continue;
            const int nx = cx + dx, ny = cy + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            const std::size_t j = static_cast<std::size_t>(ny) * w + nx;
            if (bits[j] && !seen[j]) {
              seen[j] = 1;
              q.push({nx, ny});
            }
          }
        }
      }
    }
  }
  return count;
}

// Convex-quad generator: four points on a jittered ellipse, angle-sorted.
inline dgst::Quad random_convex_quad(std::mt19937_64& rng, double extent = 100.0) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (;;) {
    const double cx = extent * (0.2 + 0.6 * U(rng));
    const double cy = extent * (0.2 + 0.6 * U(rng));
    const double rx = extent * (0.05 + 0.3 * U(rng));
    const double ry = extent * (0.05 + 0.3 * U(rng));
    std::vector<double> ang(4);
    for (auto& a : ang) a = 2 * std::numbers::pi * U(rng);
    std::sort(ang.begin(), ang.end());
    std::array<dgst::Point, 4> p{};
    for (int k = 0; k < 4; ++k) p[k] = {cx + rx * std::cos(ang[k]), cy + ry * std::sin(ang[k])};
    try {
      const auto q = dgst::make_quad(p);
      if (std::abs(dgst::polygon_area(q)) > 1.0) return q;
    } catch (const dgst::DegenerateQuad&) {
    }
  }
}

}  // namespace oracle

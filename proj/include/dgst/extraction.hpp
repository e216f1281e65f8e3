#pragma once

// Text box extraction from a pair of score maps (full and shrunk).
//
//   1. B_s1 = threshold(full, t), outer components = CC(B_s1)
//   2. B_s  = threshold(full + shrunk, t) with pixels outside threshold(shrunk, t) cleared
//   3. seeds = CC(B_s)
//   4. every seed that lies inside an outer component grows until it meets
//      the outer component's edge or another seed's territory; this is a
//      nearest-seed partition of the outer component's pixels
//   5. each partition becomes one rotated rectangle

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dgst/geometry.hpp"
#include "dgst/labelgen.hpp"

namespace dgst {

inline constexpr double kDefaultThreshold = 0.25;
inline constexpr int kDefaultMinComponentPx = 10;

struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  BinaryMask() = default;
  BinaryMask(int w, int h) : width(w), height(h), bits(static_cast<std::size_t>(w) * h, 0) {}

  bool at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
  std::size_t count() const { return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), 1)); }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;
};

struct ComponentInfo {
  int pixel_count = 0;
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // inclusive bounding box
};

struct LabelMap {
  int width = 0;
  int height = 0;
  std::vector<std::int32_t> labels;  // 0 = background
  int component_count = 0;
  std::vector<ComponentInfo> components;  // components[label - 1]

  std::int32_t at(int x, int y) const { return labels[static_cast<std::size_t>(y) * width + x]; }
  const ComponentInfo& info(int label) const { return components[static_cast<std::size_t>(label - 1)]; }
};

struct ExtractionParams {
  double t = kDefaultThreshold;
  // Threshold applied to the summed map; defaults to t.
  std::optional<double> fused_t;
  int connectivity = 8;
  int min_component_px = kDefaultMinComponentPx;
  double shrink_r = kDefaultShrink;

  void validate() const {
    if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("threshold t must be in (0,1)");
    if (fused_t && !std::isfinite(*fused_t)) throw std::invalid_argument("fused threshold must be finite");
    if (connectivity != 4 && connectivity != 8) throw std::invalid_argument("connectivity must be 4 or 8");
    if (min_component_px < 1) throw std::invalid_argument("min_component_px must be >= 1");
    if (!(shrink_r >= 0.0 && shrink_r < 0.5)) throw std::invalid_argument("shrink ratio must be in [0,0.5)");
  }
};

template <typename T>
BinaryMask threshold(const BasicScoreMap<T>& m, double t) {
  BinaryMask out(m.width, m.height);
  for (std::size_t i = 0; i < m.values.size(); ++i) out.bits[i] = static_cast<double>(m.values[i]) >= t ? 1 : 0;
  return out;
}

namespace detail {

struct DisjointSet {
  std::vector<std::int32_t> parent;

  std::int32_t make() {
    parent.push_back(static_cast<std::int32_t>(parent.size()));
    return parent.back();
  }
  std::int32_t find(std::int32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::int32_t a, std::int32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) std::swap(a, b);
    parent[a] = b;
  }
};

}  // namespace detail

/// Two-pass union-find labeling. Labels are 1..N in order of each
/// component's first pixel in a row-major scan.
inline LabelMap connected_components(const BinaryMask& mask, int connectivity = 8) {
  if (connectivity != 4 && connectivity != 8) throw std::invalid_argument("connectivity must be 4 or 8");
  const int w = mask.width;
  const int h = mask.height;
  LabelMap out;
  out.width = w;
  out.height = h;
  out.labels.assign(static_cast<std::size_t>(w) * h, 0);

  detail::DisjointSet ds;
  ds.make();  // provisional label 0 is background
  auto& lab = out.labels;
  auto idx = [w](int x, int y) { return static_cast<std::size_t>(y) * w + x; };

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.at(x, y)) continue;
      std::int32_t cur = 0;
      auto visit = [&](int nx, int ny) {
        if (nx < 0 || nx >= w || ny < 0) return;
        const std::int32_t l = lab[idx(nx, ny)];
        if (l == 0) return;
        if (cur == 0) {
          cur = l;
        } else if (l != cur) {
          ds.unite(cur, l);
        }
      };
      visit(x - 1, y);
      visit(x, y - 1);
      if (connectivity == 8) {
        visit(x - 1, y - 1);
        visit(x + 1, y - 1);
      }
      lab[idx(x, y)] = cur != 0 ? cur : ds.make();
    }
  }

  std::vector<std::int32_t> final_label(ds.parent.size(), 0);
  for (std::size_t i = 0; i < lab.size(); ++i) {
    if (lab[i] == 0) continue;
    const std::int32_t root = ds.find(lab[i]);
    if (final_label[root] == 0) {
      final_label[root] = ++out.component_count;
      const int x = static_cast<int>(i % w);
      const int y = static_cast<int>(i / w);
      out.components.push_back({0, x, y, x, y});
    }
    const std::int32_t l = final_label[root];
    lab[i] = l;
    ComponentInfo& c = out.components[static_cast<std::size_t>(l - 1)];
    const int x = static_cast<int>(i % w);
    const int y = static_cast<int>(i / w);
    ++c.pixel_count;
    c.x0 = std::min(c.x0, x);
    c.x1 = std::max(c.x1, x);
    c.y1 = std::max(c.y1, y);
  }
  return out;
}

/// Sums the two maps, thresholds the sum at `fused_t` and clears every pixel
/// that is below `t` in the shrunk map. With nonnegative maps and
/// fused_t == t this equals threshold(m2, t).
template <typename T>
BinaryMask fuse_masks(const BasicScoreMap<T>& m1, const BasicScoreMap<T>& m2, double t,
                      std::optional<double> fused_t = std::nullopt) {
  if (m1.width != m2.width || m1.height != m2.height) throw DimensionMismatch("score maps differ in size");
  const double ft = fused_t.value_or(t);
  BinaryMask out(m1.width, m1.height);
  for (std::size_t i = 0; i < m1.values.size(); ++i) {
    const T sum = m1.values[i] + m2.values[i];
    const bool combined = static_cast<double>(sum) >= ft;
    const bool shrunk = static_cast<double>(m2.values[i]) >= t;
    out.bits[i] = combined && shrunk ? 1 : 0;
  }
  return out;
}

/// Pixels of one outer component split among the seeds it contains.
struct Partition {
  std::vector<int> seed_labels;            // ascending; {0} for the implicit seed
  std::vector<std::vector<int>> pixels;    // row-major pixel indices per seed
};

/// Assigns each pixel of component `outer_label` to the contained seed whose
/// nearest pixel center is closest (ties: smaller seed label). A seed counts
/// as contained only when all of its pixels belong to the outer component.
/// Without contained seeds the whole component goes to implicit seed 0.
inline Partition assign_nearest_seed(const LabelMap& outer, int outer_label, const LabelMap& seeds) {
  if (outer.width != seeds.width || outer.height != seeds.height) throw DimensionMismatch("label maps differ in size");
  if (outer_label < 1 || outer_label > outer.component_count) throw std::out_of_range("no such outer component");
  const int w = outer.width;
  const ComponentInfo& box = outer.info(outer_label);

  std::map<int, int> inside_count;
  std::vector<int> members;
  for (int y = box.y0; y <= box.y1; ++y) {
    for (int x = box.x0; x <= box.x1; ++x) {
      if (outer.at(x, y) != outer_label) continue;
      members.push_back(y * w + x);
      const int s = seeds.at(x, y);
      if (s > 0) ++inside_count[s];
    }
  }

  Partition part;
  for (const auto& [label, n] : inside_count) {
    if (n == seeds.info(label).pixel_count) part.seed_labels.push_back(label);
  }
  if (part.seed_labels.empty()) {
    part.seed_labels.push_back(0);
    part.pixels.push_back(std::move(members));
    return part;
  }
  part.pixels.resize(part.seed_labels.size());

  // The nearest pixel of a set to an outside point always has a 4-neighbour
  // outside the set, so only seed boundary pixels are candidates.
  struct Site {
    int x, y;
    std::size_t slot;
  };
  std::vector<Site> sites;
  std::map<int, std::size_t> slot_of;
  for (std::size_t k = 0; k < part.seed_labels.size(); ++k) {
    const int s = part.seed_labels[k];
    slot_of[s] = k;
    const ComponentInfo& sb = seeds.info(s);
    for (int y = sb.y0; y <= sb.y1; ++y) {
      for (int x = sb.x0; x <= sb.x1; ++x) {
        if (seeds.at(x, y) != s) continue;
        const bool edge = x == 0 || y == 0 || x == w - 1 || y == seeds.height - 1 || seeds.at(x - 1, y) != s ||
                          seeds.at(x + 1, y) != s || seeds.at(x, y - 1) != s || seeds.at(x, y + 1) != s;
        if (edge) sites.push_back({x, y, k});
      }
    }
  }

  for (const int p : members) {
    const int x = p % w;
    const int y = p / w;
    const int own = seeds.at(x, y);
    if (own > 0) {
      const auto it = slot_of.find(own);
      if (it != slot_of.end()) {
        part.pixels[it->second].push_back(p);
        continue;
      }
    }
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    std::size_t best_slot = 0;
    for (const Site& s : sites) {
      const std::int64_t dx = s.x - x;
      const std::int64_t dy = s.y - y;
      const std::int64_t d2 = dx * dx + dy * dy;
      if (d2 < best || (d2 == best && s.slot < best_slot)) {
        best = d2;
        best_slot = s.slot;
      }
    }
    part.pixels[best_slot].push_back(p);
  }
  return part;
}

/// Rotated rectangle covering a set of pixels: the minimum-area rectangle of
/// the pixel centers grown by half a pixel on every side. Sets whose centers
/// are collinear fall back to the rectangle of the pixel corners.
inline Quad pixel_region_rect(const std::vector<int>& pixels, int width) {
  if (pixels.empty()) throw DegenerateInput("empty pixel set");
  // Row extremes span the same hull as the full set.
  std::map<int, std::pair<int, int>> rows;
  for (const int p : pixels) {
    const int x = p % width;
    const int y = p / width;
    auto [it, fresh] = rows.try_emplace(y, x, x);
    if (!fresh) {
      it->second.first = std::min(it->second.first, x);
      it->second.second = std::max(it->second.second, x);
    }
  }
  std::vector<Point> centers;
  for (const auto& [y, span] : rows) {
    centers.push_back({span.first + 0.5, y + 0.5});
    if (span.second != span.first) centers.push_back({span.second + 0.5, y + 0.5});
  }
  try {
    const Quad r = min_area_rect(centers);
    const Point c = 0.25 * (r.v[0] + r.v[1] + r.v[2] + r.v[3]);
    const Point a = r.v[1] - r.v[0];
    const Point b = r.v[3] - r.v[0];
    const double la = norm(a);
    const double lb = norm(b);
    const Point u = (1.0 / la) * a;
    const Point n = (1.0 / lb) * b;
    const double ha = 0.5 * la + 0.5;
    const double hb = 0.5 * lb + 0.5;
    return make_quad({c - ha * u - hb * n, c + ha * u - hb * n, c + ha * u + hb * n, c - ha * u + hb * n});
  } catch (const DegenerateInput&) {
    std::vector<Point> corners;
    for (const auto& [y, span] : rows) {
      for (const double cx : {double(span.first), span.second + 1.0}) {
        corners.push_back({cx, double(y)});
        corners.push_back({cx, y + 1.0});
      }
    }
    return min_area_rect(corners);
  }
}

/// Seed-constrained extraction. Output order follows seed labels.
template <typename T>
std::vector<Quad> extract_boxes(const BasicScoreMap<T>& map_full, const BasicScoreMap<T>& map_shrunk,
                                const ExtractionParams& params = {}) {
  params.validate();
  if (map_full.width != map_shrunk.width || map_full.height != map_shrunk.height) {
    throw DimensionMismatch("score maps differ in size");
  }
  const int w = map_full.width;
  const LabelMap outer = connected_components(threshold(map_full, params.t), params.connectivity);
  // Seeds smaller than min_component_px are noise; they would otherwise
  // claim a share of the outer component and split a word.
  BinaryMask fused = fuse_masks(map_full, map_shrunk, params.t, params.fused_t);
  {
    const LabelMap raw = connected_components(fused, params.connectivity);
    for (std::size_t i = 0; i < fused.bits.size(); ++i) {
      if (raw.labels[i] != 0 && raw.info(raw.labels[i]).pixel_count < params.min_component_px) fused.bits[i] = 0;
    }
  }
  const LabelMap seeds = connected_components(fused, params.connectivity);

  // outer label -> partition, filled the first time a contained seed asks.
  std::map<int, Partition> partitions;
  std::vector<std::vector<int>> region(static_cast<std::size_t>(seeds.component_count));

  std::vector<int> first_outer(static_cast<std::size_t>(seeds.component_count), 0);
  std::vector<int> inside(static_cast<std::size_t>(seeds.component_count), 0);
  std::vector<char> seen(static_cast<std::size_t>(seeds.component_count), 0);
  for (std::size_t i = 0; i < seeds.labels.size(); ++i) {
    const int s = seeds.labels[i];
    if (s == 0) continue;
    const std::size_t k = static_cast<std::size_t>(s - 1);
    const int o = outer.labels[i];
    if (!seen[k]) {
      seen[k] = 1;
      first_outer[k] = o;
    }
    if (o != 0 && o == first_outer[k]) ++inside[k];
  }

  for (int s = 1; s <= seeds.component_count; ++s) {
    const std::size_t k = static_cast<std::size_t>(s - 1);
    const int o = first_outer[k];
    if (o != 0 && inside[k] == seeds.info(s).pixel_count) {
      auto it = partitions.find(o);
      if (it == partitions.end()) it = partitions.emplace(o, assign_nearest_seed(outer, o, seeds)).first;
      const Partition& part = it->second;
      const auto pos = std::lower_bound(part.seed_labels.begin(), part.seed_labels.end(), s);
      region[k] = part.pixels[static_cast<std::size_t>(pos - part.seed_labels.begin())];
    } else {
      // Not enclosed by any single outer component: keep the seed as is.
      const ComponentInfo& sb = seeds.info(s);
      for (int y = sb.y0; y <= sb.y1; ++y) {
        for (int x = sb.x0; x <= sb.x1; ++x) {
          if (seeds.at(x, y) == s) region[k].push_back(y * w + x);
        }
      }
    }
  }

  std::vector<Quad> boxes;
  for (const auto& pix : region) {
    if (static_cast<int>(pix.size()) < params.min_component_px) continue;
    boxes.push_back(pixel_region_rect(pix, w));
  }
  return boxes;
}

template <typename T>
std::vector<Quad> extract_boxes(const BasicScoreMapPair<T>& pair, const ExtractionParams& params = {}) {
  return extract_boxes(pair.map_full, pair.map_shrunk, params);
}

}  // namespace dgst

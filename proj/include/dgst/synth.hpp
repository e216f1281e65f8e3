#pragma once

// Deterministic synthetic scenes and score-map perturbation. Every random
// draw comes from SplitMix64 (Steele, Lea & Flood 2014) with explicit
// conversions, so a seed yields the same corpus on any platform:
//
//   state += 0x9E3779B97F4A7C15
//   z = state; z = (z ^ z>>30) * 0xBF58476D1CE4E5B9; z = (z ^ z>>27) * 0x94D049BB133111EB
//   return z ^ z>>31
//
//   uniform01 = (next() >> 11) * 2^-53          in [0,1)
//   normal    = sqrt(-2 ln(1 - u1)) * cos(2 pi u2)   (one Box-Muller draw)

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dgst/error.hpp"
#include "dgst/formats.hpp"
#include "dgst/geometry.hpp"
#include "dgst/labelgen.hpp"
#include "dgst/parallel.hpp"

namespace dgst {

class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() { return next(); }

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(next());
    return lo + static_cast<std::int64_t>(next() % span);
  }

  double normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t state_;
};

struct SynthConfig {
  int width = 640;
  int height = 640;
  int min_boxes = 3;
  int max_boxes = 10;
  double min_box_w = 30.0;
  double max_box_w = 160.0;
  double min_box_h = 12.0;
  double max_box_h = 40.0;
  double min_angle_deg = -30.0;
  double max_angle_deg = 30.0;
  double min_gap = 4.0;  // between unshrunk boxes
  double ignore_fraction = 0.0;
  std::uint64_t seed = 0;
  int max_attempts = 10000;

  void validate() const {
    if (width <= 0 || height <= 0) throw std::invalid_argument("image size must be positive");
    if (min_boxes < 0 || max_boxes < min_boxes) throw std::invalid_argument("bad box count range");
    if (!(min_box_w > 0 && max_box_w >= min_box_w)) throw std::invalid_argument("bad box width range");
    if (!(min_box_h > 0 && max_box_h >= min_box_h)) throw std::invalid_argument("bad box height range");
    if (!(max_angle_deg >= min_angle_deg)) throw std::invalid_argument("bad rotation range");
    if (!(min_gap >= 0)) throw std::invalid_argument("min gap must be >= 0");
    if (!(ignore_fraction >= 0 && ignore_fraction <= 1)) throw std::invalid_argument("ignore fraction must be in [0,1]");
    if (max_attempts < 1) throw std::invalid_argument("max_attempts must be >= 1");
  }
};

struct NoiseSpec {
  double sigma = 0.0;
  int blur_radius = 0;
  double salt_pepper = 0.0;
  std::uint64_t seed = 0;

  bool is_identity() const { return sigma == 0.0 && blur_radius == 0 && salt_pepper == 0.0; }

  void validate() const {
    if (!(sigma >= 0)) throw std::invalid_argument("noise sigma must be >= 0");
    if (blur_radius < 0) throw std::invalid_argument("blur radius must be >= 0");
    if (!(salt_pepper >= 0 && salt_pepper < 1)) throw std::invalid_argument("salt-pepper fraction must be in [0,1)");
  }
};

/// Rejection-samples rotated rectangles with integer vertices until the
/// drawn box count is met. Boxes stay inside the image and keep at least
/// `min_gap` between each other.
inline AnnotatedScene synth_scene(const SynthConfig& cfg) {
  cfg.validate();
  SplitMix64 rng(cfg.seed);
  AnnotatedScene scene{cfg.width, cfg.height, {}};
  const auto want = static_cast<std::size_t>(rng.uniform_int(cfg.min_boxes, cfg.max_boxes));

  for (int attempt = 0; attempt < cfg.max_attempts && scene.boxes.size() < want; ++attempt) {
    const double w = rng.uniform(cfg.min_box_w, cfg.max_box_w);
    const double h = rng.uniform(cfg.min_box_h, cfg.max_box_h);
    const double angle = rng.uniform(cfg.min_angle_deg, cfg.max_angle_deg) * std::numbers::pi / 180.0;
    const double ex = 0.5 * (w * std::abs(std::cos(angle)) + h * std::abs(std::sin(angle)));
    const double ey = 0.5 * (w * std::abs(std::sin(angle)) + h * std::abs(std::cos(angle)));
    if (2 * ex > cfg.width || 2 * ey > cfg.height) continue;
    const double cx = rng.uniform(ex, cfg.width - ex);
    const double cy = rng.uniform(ey, cfg.height - ey);
    const bool ignore = cfg.ignore_fraction > 0.0 && rng.uniform01() < cfg.ignore_fraction;

    const Point u{std::cos(angle), std::sin(angle)};
    const Point n{-u.y, u.x};
    const Point c{cx, cy};
    std::array<Point, 4> pts{c - 0.5 * w * u - 0.5 * h * n, c + 0.5 * w * u - 0.5 * h * n,
                             c + 0.5 * w * u + 0.5 * h * n, c - 0.5 * w * u + 0.5 * h * n};
    for (Point& p : pts) {
      p.x = std::clamp(std::round(p.x), 0.0, static_cast<double>(cfg.width));
      p.y = std::clamp(std::round(p.y), 0.0, static_cast<double>(cfg.height));
    }
    Quad q;
    try {
      q = make_quad(pts);
    } catch (const DegenerateQuad&) {
      continue;
    }
    const bool clear = std::all_of(scene.boxes.begin(), scene.boxes.end(),
                                   [&](const TextBox& b) { return quad_distance(q, b.quad) >= cfg.min_gap; });
    if (!clear) continue;
    TextBox box;
    box.quad = q;
    box.ignore = ignore;
    box.transcript = ignore ? std::string(kIgnoreTranscript) : "w" + std::to_string(scene.boxes.size());
    scene.boxes.push_back(std::move(box));
  }
  if (scene.boxes.size() < want) throw PlacementFailure(scene.boxes.size(), want);
  return scene;
}

/// Box blur (window clipped at the borders), additive Gaussian noise and
/// salt-and-pepper flips, clamped to [0,1]. Draws are taken per pixel in
/// row-major order: one normal (if sigma > 0), then one uniform and, when it
/// fires, one coin (if salt_pepper > 0).
inline ScoreMap perturb_map(const ScoreMap& m, const NoiseSpec& noise) {
  noise.validate();
  if (noise.is_identity()) return m;
  ScoreMap out = m;
  const int w = m.width;
  const int h = m.height;
  if (noise.blur_radius > 0) {
    // Summed-area table in double for an order-fixed window mean.
    std::vector<double> sat(static_cast<std::size_t>(w + 1) * (h + 1), 0.0);
    auto S = [&](int x, int y) -> double& { return sat[static_cast<std::size_t>(y) * (w + 1) + x]; };
    for (int y = 0; y < h; ++y) {
      double row = 0.0;
      for (int x = 0; x < w; ++x) {
        row += m.at(x, y);
        S(x + 1, y + 1) = S(x + 1, y) + row;
      }
    }
    const int r = noise.blur_radius;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const int x0 = std::max(0, x - r), x1 = std::min(w, x + r + 1);
        const int y0 = std::max(0, y - r), y1 = std::min(h, y + r + 1);
        const double sum = S(x1, y1) - S(x0, y1) - S(x1, y0) + S(x0, y0);
        out.at(x, y) = static_cast<float>(sum / ((x1 - x0) * (y1 - y0)));
      }
    }
  }
  SplitMix64 rng(noise.seed);
  for (float& v : out.values) {
    double x = v;
    if (noise.sigma > 0.0) x += noise.sigma * rng.normal();
    if (noise.salt_pepper > 0.0 && rng.uniform01() < noise.salt_pepper) x = (rng.next() & 1u) ? 1.0 : 0.0;
    v = static_cast<float>(std::clamp(x, 0.0, 1.0));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Corpus layout under out_dir:
//   images/NNNN.gt.txt   ICDAR annotations
//   maps/NNNN.s0.pfm     clean full map       maps/NNNN.s1.pfm   clean shrunk map
//   noisy/NNNN.s0.pfm    perturbed full map   noisy/NNNN.s1.pfm  perturbed shrunk map
//   manifest.json
// Image i uses scene seed (cfg.seed ^ i); its two noise streams are the first
// two outputs of SplitMix64(noise.seed ^ i).

inline std::string image_id(std::size_t index, std::size_t count) {
  std::string s = std::to_string(index);
  const std::size_t digits = std::max<std::size_t>(4, std::to_string(count > 0 ? count - 1 : 0).size());
  return std::string(digits > s.size() ? digits - s.size() : 0, '0') + s;
}

inline nlohmann::ordered_json config_to_json(const SynthConfig& c) {
  return {{"width", c.width},           {"height", c.height},
          {"min_boxes", c.min_boxes},   {"max_boxes", c.max_boxes},
          {"min_box_w", c.min_box_w},   {"max_box_w", c.max_box_w},
          {"min_box_h", c.min_box_h},   {"max_box_h", c.max_box_h},
          {"min_angle_deg", c.min_angle_deg}, {"max_angle_deg", c.max_angle_deg},
          {"min_gap", c.min_gap},       {"ignore_fraction", c.ignore_fraction},
          {"seed", c.seed},             {"max_attempts", c.max_attempts}};
}

inline nlohmann::ordered_json noise_to_json(const NoiseSpec& n) {
  return {{"sigma", n.sigma}, {"blur_radius", n.blur_radius}, {"salt_pepper", n.salt_pepper}, {"seed", n.seed}};
}

/// Writes the corpus and returns the manifest (also saved as manifest.json).
inline nlohmann::ordered_json make_corpus(const SynthConfig& cfg, std::size_t n_images, const NoiseSpec& noise,
                                          const std::filesystem::path& out_dir, double shrink_r = kDefaultShrink,
                                          unsigned threads = 1) {
  cfg.validate();
  noise.validate();
  namespace fs = std::filesystem;
  std::error_code ec;
  for (const char* sub : {"images", "maps", "noisy"}) {
    fs::create_directories(out_dir / sub, ec);
    if (ec) throw IoError("cannot create " + (out_dir / sub).string() + ": " + ec.message());
  }

  std::vector<nlohmann::ordered_json> entries(n_images);
  parallel_for(n_images, threads, [&](std::size_t i) {
    const std::string id = image_id(i, n_images);
    SynthConfig c = cfg;
    c.seed = cfg.seed ^ static_cast<std::uint64_t>(i);
    const AnnotatedScene scene = synth_scene(c);
    const ScoreMapPair pair = gen_label_pair(scene, shrink_r);

    SplitMix64 streams(noise.seed ^ static_cast<std::uint64_t>(i));
    NoiseSpec n0 = noise, n1 = noise;
    n0.seed = streams.next();
    n1.seed = streams.next();

    const std::string gt = "images/" + id + ".gt.txt";
    const std::string s0 = "maps/" + id + ".s0.pfm";
    const std::string s1 = "maps/" + id + ".s1.pfm";
    const std::string ns0 = "noisy/" + id + ".s0.pfm";
    const std::string ns1 = "noisy/" + id + ".s1.pfm";
    write_file(out_dir / gt, write_annotations(scene.boxes));
    save_pfm(out_dir / s0, pair.map_full);
    save_pfm(out_dir / s1, pair.map_shrunk);
    save_pfm(out_dir / ns0, perturb_map(pair.map_full, n0));
    save_pfm(out_dir / ns1, perturb_map(pair.map_shrunk, n1));

    entries[i] = {{"id", id},         {"seed", c.seed},   {"noise_seeds", {n0.seed, n1.seed}},
                  {"boxes", scene.boxes.size()},          {"gt", gt},
                  {"s0", s0},         {"s1", s1},         {"noisy_s0", ns0},
                  {"noisy_s1", ns1}};
  });

  nlohmann::ordered_json manifest;
  manifest["format_version"] = 1;
  manifest["prng"] = "splitmix64";
  manifest["image_count"] = n_images;
  manifest["shrink_r"] = shrink_r;
  manifest["config"] = config_to_json(cfg);
  manifest["noise"] = noise_to_json(noise);
  manifest["images"] = entries;
  write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

}  // namespace dgst

#pragma once

// ICDAR-style detection scoring: one-to-one IoU matching, "###" ignore
// regions, precision / recall / F-measure.

#include <algorithm>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "dgst/error.hpp"
#include "dgst/geometry.hpp"
#include "dgst/labelgen.hpp"

namespace dgst {

inline constexpr double kDefaultIouThreshold = 0.5;
inline constexpr double kIgnoreOverlap = 0.5;

struct MatchPair {
  std::size_t det = 0;
  std::size_t gt = 0;
  double iou = 0.0;

  friend bool operator==(const MatchPair&, const MatchPair&) = default;
};

struct MatchResult {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::vector<MatchPair> pairs;  // ascending det index
};

struct Prf {
  double precision = 1.0;
  double recall = 1.0;
  double f_measure = 1.0;
};

/// Indices of detections that survive ignore filtering: a detection is
/// dropped when more than half of its area lies inside one ignore region.
inline std::vector<std::size_t> filter_ignored(std::span<const Quad> dets, std::span<const Quad> ignores) {
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    const double area = std::abs(polygon_area(dets[i]));
    const bool drop = std::any_of(ignores.begin(), ignores.end(), [&](const Quad& ig) {
      return intersection_area(dets[i], ig) / area > kIgnoreOverlap;
    });
    if (!drop) kept.push_back(i);
  }
  return kept;
}

/// Greedy matching in descending IoU order (ties: lower gt, then lower det).
/// A pair is accepted iff IoU > iou_thr and both members are still free.
inline MatchResult match_detections(std::span<const Quad> dets, std::span<const Quad> gts,
                                    double iou_thr = kDefaultIouThreshold) {
  std::vector<MatchPair> cand;
  for (std::size_t d = 0; d < dets.size(); ++d) {
    for (std::size_t g = 0; g < gts.size(); ++g) {
      const double iou = polygon_iou(dets[d], gts[g]);
      if (iou > iou_thr) cand.push_back({d, g, iou});
    }
  }
  std::sort(cand.begin(), cand.end(), [](const MatchPair& a, const MatchPair& b) {
    return std::tuple(-a.iou, a.gt, a.det) < std::tuple(-b.iou, b.gt, b.det);
  });
  std::vector<char> det_used(dets.size(), 0);
  std::vector<char> gt_used(gts.size(), 0);
  MatchResult r;
  for (const MatchPair& c : cand) {
    if (det_used[c.det] || gt_used[c.gt]) continue;
    det_used[c.det] = gt_used[c.gt] = 1;
    r.pairs.push_back(c);
  }
  std::sort(r.pairs.begin(), r.pairs.end(), [](const MatchPair& a, const MatchPair& b) { return a.det < b.det; });
  r.tp = r.pairs.size();
  r.fp = dets.size() - r.tp;
  r.fn = gts.size() - r.tp;
  return r;
}

/// Precision, recall and their harmonic mean. An empty denominator counts as
/// vacuously perfect (1); F is 0 when P + R is 0.
inline Prf prf(std::size_t tp, std::size_t fp, std::size_t fn) {
  Prf out;
  out.precision = tp + fp == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  out.recall = tp + fn == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  const double s = out.precision + out.recall;
  out.f_measure = s > 0.0 ? 2.0 * out.precision * out.recall / s : 0.0;
  return out;
}

struct ImageInput {
  std::string id;
  std::vector<TextBox> gts;
  std::optional<std::vector<Quad>> dets;  // nullopt: no detection file
};

struct ImageResult {
  std::string id;
  MatchResult match;  // pair indices refer to the original det / gt order
  bool missing_dets = false;
};

struct EvalReport {
  std::vector<ImageResult> per_image;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 1.0;
  double recall = 1.0;
  double f_measure = 1.0;
};

/// Scores one image: ignore-flagged ground truth is removed from recall and
/// suppresses detections it mostly covers.
inline ImageResult evaluate_image(const std::string& id, std::span<const TextBox> gts, std::span<const Quad> dets,
                                  double iou_thr = kDefaultIouThreshold) {
  std::vector<Quad> care;
  std::vector<std::size_t> care_index;
  std::vector<Quad> ignores;
  for (std::size_t i = 0; i < gts.size(); ++i) {
    if (gts[i].ignore) {
      ignores.push_back(gts[i].quad);
    } else {
      care.push_back(gts[i].quad);
      care_index.push_back(i);
    }
  }
  const std::vector<std::size_t> kept = filter_ignored(dets, ignores);
  std::vector<Quad> kept_dets;
  for (const std::size_t k : kept) kept_dets.push_back(dets[k]);

  ImageResult out;
  out.id = id;
  out.match = match_detections(kept_dets, care, iou_thr);
  for (MatchPair& p : out.match.pairs) {
    p.det = kept[p.det];
    p.gt = care_index[p.gt];
  }
  return out;
}

/// Micro-averaged corpus score. Images without detections raise MissingImage
/// unless `allow_missing`, in which case they count as empty.
inline EvalReport evaluate_corpus(std::span<const ImageInput> images, double iou_thr = kDefaultIouThreshold,
                                  bool allow_missing = false) {
  EvalReport rep;
  for (const ImageInput& img : images) {
    if (!img.dets && !allow_missing) throw MissingImage("no detections for image '" + img.id + "'");
    const std::vector<Quad> none;
    const std::vector<Quad>& dets = img.dets ? *img.dets : none;
    ImageResult r = evaluate_image(img.id, img.gts, dets, iou_thr);
    r.missing_dets = !img.dets;
    rep.tp += r.match.tp;
    rep.fp += r.match.fp;
    rep.fn += r.match.fn;
    rep.per_image.push_back(std::move(r));
  }
  const Prf s = prf(rep.tp, rep.fp, rep.fn);
  rep.precision = s.precision;
  rep.recall = s.recall;
  rep.f_measure = s.f_measure;
  return rep;
}

namespace detail {

inline std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace detail

/// JSON report; all reals carry exactly six decimals.
inline std::string report_to_json(const EvalReport& rep) {
  std::string out = "{\n  \"images\": [";
  for (std::size_t i = 0; i < rep.per_image.size(); ++i) {
    const ImageResult& r = rep.per_image[i];
    out += i ? ",\n    " : "\n    ";
    out += "{\"id\": " + nlohmann::json(r.id).dump();
    out += ", \"tp\": " + std::to_string(r.match.tp);
    out += ", \"fp\": " + std::to_string(r.match.fp);
    out += ", \"fn\": " + std::to_string(r.match.fn);
    out += ", \"pairs\": [";
    for (std::size_t k = 0; k < r.match.pairs.size(); ++k) {
      const MatchPair& p = r.match.pairs[k];
      if (k) out += ", ";
      out += "[" + std::to_string(p.det) + ", " + std::to_string(p.gt) + ", " + detail::fixed6(p.iou) + "]";
    }
    out += "]";
    if (r.missing_dets) out += ", \"missing\": true";
    out += "}";
  }
  out += rep.per_image.empty() ? "],\n" : "\n  ],\n";
  out += "  \"image_count\": " + std::to_string(rep.per_image.size()) + ",\n";
  out += "  \"tp\": " + std::to_string(rep.tp) + ",\n";
  out += "  \"fp\": " + std::to_string(rep.fp) + ",\n";
  out += "  \"fn\": " + std::to_string(rep.fn) + ",\n";
  out += "  \"precision\": " + detail::fixed6(rep.precision) + ",\n";
  out += "  \"recall\": " + detail::fixed6(rep.recall) + ",\n";
  out += "  \"f_measure\": " + detail::fixed6(rep.f_measure) + "\n}\n";
  return out;
}

inline std::string summary_line(const EvalReport& rep) {
  return "P=" + detail::fixed6(rep.precision) + " R=" + detail::fixed6(rep.recall) +
         " F=" + detail::fixed6(rep.f_measure);
}

}  // namespace dgst

// dgst: batch driver for label generation, extraction, evaluation,
// corpus synthesis, loss evaluation and figure rendering.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dgst/dgst.hpp"

namespace fs = std::filesystem;
using namespace dgst;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitInternal = 2;

// Files in `dir` whose names end with `suffix`, sorted by name.
std::vector<std::string> stems_with_suffix(const fs::path& dir, std::string_view suffix) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<std::string> stems;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const std::string name = e.path().filename().string();
    if (name.size() > suffix.size() && name.ends_with(suffix)) stems.push_back(name.substr(0, name.size() - suffix.size()));
  }
  std::sort(stems.begin(), stems.end());
  return stems;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

// Per-item diagnostics, reported in input order once all workers are done.
struct Diagnostics {
  std::vector<std::string> messages;
  explicit Diagnostics(std::size_t n) : messages(n) {}
  int report() const {
    int failures = 0;
    for (const auto& m : messages) {
      if (m.empty()) continue;
      std::cerr << "error: " << m << "\n";
      ++failures;
    }
    return failures;
  }
};

struct GenLabelsArgs {
  std::string gt_dir, out_dir;
  double shrink = kDefaultShrink;
  int width = 640, height = 640;
};

int cmd_gen_labels(const GenLabelsArgs& a, unsigned threads) {
  if (!(a.shrink >= 0 && a.shrink < 0.5)) throw std::invalid_argument("--shrink must be in [0, 0.5)");
  if (a.width <= 0 || a.height <= 0) throw std::invalid_argument("--width/--height must be positive");
  const auto stems = stems_with_suffix(a.gt_dir, ".gt.txt");
  if (stems.empty()) {
    std::cerr << "warning: no *.gt.txt files in " << a.gt_dir << "\n";
    return kExitOk;
  }
  ensure_dir(a.out_dir);
  Diagnostics diag(stems.size());
  parallel_for(stems.size(), threads, [&](std::size_t i) {
    const fs::path src = fs::path(a.gt_dir) / (stems[i] + ".gt.txt");
    try {
      AnnotatedScene scene{a.width, a.height, parse_icdar(read_file(src), std::pair{a.width, a.height})};
      const ScoreMapPair pair = gen_label_pair(scene, a.shrink);
      save_pfm(fs::path(a.out_dir) / (stems[i] + ".s0.pfm"), pair.map_full);
      save_pfm(fs::path(a.out_dir) / (stems[i] + ".s1.pfm"), pair.map_shrunk);
    } catch (const ParseError& e) {
      diag.messages[i] = src.string() + ":" + std::to_string(e.line()) + ": " + e.what();
    } catch (const Error& e) {
      diag.messages[i] = src.string() + ": " + e.what();
    }
  });
  return diag.report() ? kExitInvalid : kExitOk;
}

struct ExtractArgs {
  std::string maps_dir, out_dir;
  ExtractionParams params;
  std::optional<double> fused_t;
};

int cmd_extract(ExtractArgs a, unsigned threads) {
  a.params.fused_t = a.fused_t;
  a.params.validate();
  const auto s0 = stems_with_suffix(a.maps_dir, ".s0.pfm");
  const auto s1 = stems_with_suffix(a.maps_dir, ".s1.pfm");
  std::vector<std::string> ids;
  std::set_union(s0.begin(), s0.end(), s1.begin(), s1.end(), std::back_inserter(ids));
  if (ids.empty()) std::cerr << "warning: no score map pairs in " << a.maps_dir << "\n";
  ensure_dir(a.out_dir);
  Diagnostics diag(ids.size());
  parallel_for(ids.size(), threads, [&](std::size_t i) {
    const fs::path p0 = fs::path(a.maps_dir) / (ids[i] + ".s0.pfm");
    const fs::path p1 = fs::path(a.maps_dir) / (ids[i] + ".s1.pfm");
    try {
      if (!std::binary_search(s0.begin(), s0.end(), ids[i])) throw MissingImage("missing " + p0.string());
      if (!std::binary_search(s1.begin(), s1.end(), ids[i])) throw MissingImage("missing " + p1.string());
      const ScoreMap full = load_pfm(p0), shrunk = load_pfm(p1);
      const auto boxes = extract_boxes(full, shrunk, a.params);
      write_file(fs::path(a.out_dir) / (ids[i] + ".det.txt"), write_detections(boxes));
    } catch (const Error& e) {
      diag.messages[i] = ids[i] + ": " + e.what();
    }
  });
  return diag.report() ? kExitInvalid : kExitOk;
}

struct EvaluateArgs {
  std::string det_dir, gt_dir, report;
  double iou = kDefaultIouThreshold;
  bool allow_missing = false;
};

int cmd_evaluate(const EvaluateArgs& a, unsigned threads) {
  if (!(a.iou >= 0 && a.iou < 1)) throw std::invalid_argument("--iou must be in [0, 1)");
  if (!fs::is_directory(a.det_dir)) throw IoError("not a directory: " + a.det_dir);
  const auto stems = stems_with_suffix(a.gt_dir, ".gt.txt");
  std::vector<ImageInput> images(stems.size());
  Diagnostics diag(stems.size());
  parallel_for(stems.size(), threads, [&](std::size_t i) {
    const fs::path gt = fs::path(a.gt_dir) / (stems[i] + ".gt.txt");
    const fs::path det = fs::path(a.det_dir) / (stems[i] + ".det.txt");
    images[i].id = stems[i];
    try {
      images[i].gts = parse_icdar(read_file(gt));
    } catch (const ParseError& e) {
      diag.messages[i] = gt.string() + ":" + std::to_string(e.line()) + ": " + e.what();
      return;
    }
    if (!fs::exists(det)) return;
    try {
      images[i].dets = parse_detections(read_file(det));
    } catch (const ParseError& e) {
      diag.messages[i] = det.string() + ":" + std::to_string(e.line()) + ": " + e.what();
    }
  });
  if (diag.report()) return kExitInvalid;
  const EvalReport rep = evaluate_corpus(images, a.iou, a.allow_missing);
  if (!a.report.empty()) write_file(a.report, report_to_json(rep));
  std::cout << summary_line(rep) << "\n";
  return kExitOk;
}

struct SynthArgs {
  std::string out_dir;
  SynthConfig cfg;
  NoiseSpec noise;
  std::size_t n = 100;
  double shrink = kDefaultShrink;
};

int cmd_synth(const SynthArgs& a, unsigned threads) {
  if (!(a.shrink >= 0 && a.shrink < 0.5)) throw std::invalid_argument("--shrink must be in [0, 0.5)");
  const auto manifest = make_corpus(a.cfg, a.n, a.noise, a.out_dir, a.shrink, threads);
  std::cout << "wrote " << manifest["image_count"].get<std::size_t>() << " images to " << a.out_dir << "\n";
  return kExitOk;
}

struct LossArgs {
  std::string pred_s0, pred_s1, gt_s0, gt_s1, scores;
  double lambda = kDefaultLambda;
  bool raw_l2 = false;
  bool literal_g = false;
};

std::vector<double> doubles_of(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array()) throw std::invalid_argument(std::string("scores file needs array '") + key + "'");
  std::vector<double> out;
  for (const auto& v : j[key]) {
    if (!v.is_number()) throw std::invalid_argument(std::string("non-numeric entry in '") + key + "'");
    out.push_back(v.get<double>());
  }
  return out;
}

int cmd_loss(const LossArgs& a) {
  if (!(a.lambda >= 0)) throw std::invalid_argument("--lambda must be >= 0");
  const ScoreMap p0 = load_pfm(a.pred_s0), p1 = load_pfm(a.pred_s1);
  const ScoreMap g0 = load_pfm(a.gt_s0), g1 = load_pfm(a.gt_s1);
  if (p0.width != g0.width || p0.height != g0.height || p1.width != g1.width || p1.height != g1.height) {
    throw DimensionMismatch("prediction and target maps differ in size");
  }
  std::vector<float> pred = p0.values, gt = g0.values;
  pred.insert(pred.end(), p1.values.begin(), p1.values.end());
  gt.insert(gt.end(), g1.values.begin(), g1.values.end());
  const double l2 = l2_term(pred, gt, a.raw_l2 ? L2Mode::raw : L2Mode::rms);

  nlohmann::ordered_json out;
  out["l2"] = l2;
  out["lambda"] = a.lambda;
  out["l2_mode"] = a.raw_l2 ? "raw" : "rms";
  if (!a.scores.empty()) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_file(a.scores));
    } catch (const nlohmann::json::parse_error& e) {
      throw std::invalid_argument(a.scores + ": " + e.what());
    }
    const DiscriminatorScores s{doubles_of(j, "on_real"), doubles_of(j, "on_fake")};
    const auto form = a.literal_g ? GeneratorLossForm::literal : GeneratorLossForm::non_saturating;
    const double g = cgan_g_loss(s.on_fake, form);
    out["d_loss"] = cgan_d_loss(s);
    out["g_loss"] = g;
    out["g_form"] = a.literal_g ? "literal" : "non_saturating";
    out["objective"] = combined_objective(g, l2, {a.lambda});
  } else {
    out["d_loss"] = nullptr;
    out["g_loss"] = nullptr;
    out["objective"] = nullptr;
  }
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

struct RenderArgs {
  std::string out, map, gt, det;
  int width = 640, height = 640;
};

int cmd_render(const RenderArgs& a) {
  const bool svg = fs::path(a.out).extension() == ".svg";
  if (!svg && fs::path(a.out).extension() != ".png") throw std::invalid_argument("output must end in .png or .svg");
  if (!a.map.empty()) {
    const ScoreMap m = load_pfm(a.map);
    write_file(a.out, svg ? svg_heatmap(m) : encode_png(heatmap(m)));
    return kExitOk;
  }
  if (a.gt.empty() && a.det.empty()) throw std::invalid_argument("render needs --map or --gt/--det");
  if (a.width <= 0 || a.height <= 0) throw std::invalid_argument("--width/--height must be positive");
  std::vector<Quad> gts, dets;
  if (!a.gt.empty()) {
    for (const auto& b : parse_icdar(read_file(a.gt))) gts.push_back(b.quad);
  }
  if (!a.det.empty()) dets = parse_detections(read_file(a.det));
  write_file(a.out, svg ? svg_overlay(a.width, a.height, gts, dets) : encode_png(overlay(a.width, a.height, gts, dets)));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dgst: soft score map labels, box extraction and ICDAR-style evaluation"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value config file; [subcommand] sections, flags win");
  unsigned threads = 1;
  app.add_option("--threads", threads, "Worker threads (default from DGST_THREADS, else 1)")
      ->envname("DGST_THREADS")
      ->check(CLI::Range(1u, 1024u));

  GenLabelsArgs gl;
  auto* gen = app.add_subcommand("gen-labels", "Render .s0.pfm/.s1.pfm score map pairs from *.gt.txt annotations");
  gen->add_option("GT_DIR", gl.gt_dir)->required();
  gen->add_option("OUT_DIR", gl.out_dir)->required();
  gen->add_option("--shrink", gl.shrink, "Shrink factor for the second map")->capture_default_str();
  gen->add_option("--width", gl.width, "Image width")->capture_default_str();
  gen->add_option("--height", gl.height, "Image height")->capture_default_str();

  ExtractArgs ex;
  auto* ext = app.add_subcommand("extract", "Extract text boxes from score map pairs into <id>.det.txt");
  ext->add_option("MAPS_DIR", ex.maps_dir)->required();
  ext->add_option("OUT_DIR", ex.out_dir)->required();
  ext->add_option("--t", ex.params.t, "Binarization threshold")->capture_default_str();
  ext->add_option("--fused-t", ex.fused_t, "Threshold on the summed maps (default: --t)");
  ext->add_option("--connectivity", ex.params.connectivity, "4 or 8")->capture_default_str();
  ext->add_option("--min-px", ex.params.min_component_px, "Drop seeds and regions with fewer pixels")->capture_default_str();

  EvaluateArgs ev;
  auto* eva = app.add_subcommand("evaluate", "Score <id>.det.txt against <id>.gt.txt");
  eva->add_option("DET_DIR", ev.det_dir)->required();
  eva->add_option("GT_DIR", ev.gt_dir)->required();
  eva->add_option("--iou", ev.iou, "Match when IoU exceeds this")->capture_default_str();
  eva->add_flag("--allow-missing", ev.allow_missing, "Treat a missing detection file as no detections");
  eva->add_option("--report", ev.report, "Write the JSON report here");

  SynthArgs sy;
  auto* syn = app.add_subcommand("synth", "Generate a seeded synthetic corpus");
  syn->add_option("OUT_DIR", sy.out_dir)->required();
  syn->add_option("--n", sy.n, "Number of images")->capture_default_str();
  syn->add_option("--seed", sy.cfg.seed, "Scene seed")->capture_default_str();
  syn->add_option("--shrink", sy.shrink, "Shrink factor")->capture_default_str();
  syn->add_option("--width", sy.cfg.width)->capture_default_str();
  syn->add_option("--height", sy.cfg.height)->capture_default_str();
  syn->add_option("--min-boxes", sy.cfg.min_boxes)->capture_default_str();
  syn->add_option("--max-boxes", sy.cfg.max_boxes)->capture_default_str();
  syn->add_option("--min-box-w", sy.cfg.min_box_w)->capture_default_str();
  syn->add_option("--max-box-w", sy.cfg.max_box_w)->capture_default_str();
  syn->add_option("--min-box-h", sy.cfg.min_box_h)->capture_default_str();
  syn->add_option("--max-box-h", sy.cfg.max_box_h)->capture_default_str();
  syn->add_option("--min-angle", sy.cfg.min_angle_deg)->capture_default_str();
  syn->add_option("--max-angle", sy.cfg.max_angle_deg)->capture_default_str();
  syn->add_option("--min-gap", sy.cfg.min_gap)->capture_default_str();
  syn->add_option("--ignore-fraction", sy.cfg.ignore_fraction)->capture_default_str();
  syn->add_option("--max-attempts", sy.cfg.max_attempts)->capture_default_str();
  syn->add_option("--noise-sigma", sy.noise.sigma, "Gaussian noise sigma for noisy/ maps")->capture_default_str();
  syn->add_option("--blur", sy.noise.blur_radius, "Box blur radius")->capture_default_str();
  syn->add_option("--salt-pepper", sy.noise.salt_pepper, "Salt-and-pepper fraction")->capture_default_str();
  syn->add_option("--noise-seed", sy.noise.seed)->capture_default_str();

  LossArgs lo;
  auto* los = app.add_subcommand("loss", "Evaluate the training objective on PFM pairs; prints JSON");
  los->add_option("PRED_S0", lo.pred_s0)->required();
  los->add_option("PRED_S1", lo.pred_s1)->required();
  los->add_option("GT_S0", lo.gt_s0)->required();
  los->add_option("GT_S1", lo.gt_s1)->required();
  los->add_option("--scores", lo.scores, "JSON file with on_real/on_fake discriminator outputs");
  los->add_option("--lambda", lo.lambda)->capture_default_str();
  los->add_flag("--raw-l2", lo.raw_l2, "Sum of squares instead of RMS");
  los->add_flag("--literal-g", lo.literal_g, "Use mean log(1 - D(G(x))) as generator loss");

  RenderArgs re;
  auto* ren = app.add_subcommand("render", "Render a score map heatmap or a GT/detection overlay");
  ren->add_option("OUT", re.out, "Output .png or .svg")->required();
  ren->add_option("--map", re.map, "Score map PFM");
  ren->add_option("--gt", re.gt, "Annotation file");
  ren->add_option("--det", re.det, "Detection file");
  ren->add_option("--width", re.width)->capture_default_str();
  ren->add_option("--height", re.height)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*gen) return cmd_gen_labels(gl, threads);
    if (*ext) return cmd_extract(ex, threads);
    if (*eva) return cmd_evaluate(ev, threads);
    if (*syn) return cmd_synth(sy, threads);
    if (*los) return cmd_loss(lo);
    if (*ren) return cmd_render(re);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}

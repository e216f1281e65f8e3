#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <json.hpp>

#include "dgst/dgst.hpp"

using namespace dgst;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = -1;
  std::string out, err;
};

const fs::path& root() {
  static const fs::path p = [] {
    const fs::path d = fs::temp_directory_path() / "dgst_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return p;
}

CliRun run_cli(const std::string& args) {
  const fs::path out = root() / "stdout.txt", err = root() / "stderr.txt";
  const std::string cmd = std::string(DGST_CLI_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  CliRun r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_file(out);
  r.err = read_file(err);
  return r;
}

fs::path fresh(const std::string& name) {
  const fs::path p = root() / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string tree_bytes(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::string all;
  for (const auto& f : files) all += fs::relative(f, dir).string() + "\n" + read_file(f);
  return all;
}

}  // namespace

TEST(Cli, HelpListsSubcommandsAndFlags) {
  const CliRun r = run_cli("--help");
  EXPECT_EQ(r.code, 0);
  for (const char* s : {"gen-labels", "extract", "evaluate", "synth", "loss", "render", "--threads"}) {
    EXPECT_NE(r.out.find(s), std::string::npos) << s;
  }
  const CliRun e = run_cli("extract --help");
  EXPECT_NE(e.out.find("--t"), std::string::npos);
  const CliRun s = run_cli("synth --help");
  for (const char* f : {"--seed", "--noise-sigma", "--shrink"}) EXPECT_NE(s.out.find(f), std::string::npos) << f;
  EXPECT_NE(run_cli("evaluate --help").out.find("--iou"), std::string::npos);
}

TEST(Cli, BadUsageExitsOne) {
  EXPECT_EQ(run_cli("").code, 1);
  EXPECT_EQ(run_cli("extract").code, 1);
  EXPECT_EQ(run_cli("nonsense").code, 1);
  const fs::path d = fresh("bad_usage");
  EXPECT_EQ(run_cli("extract " + d.string() + " " + d.string() + " --t 2").code, 1);
  EXPECT_EQ(run_cli("--threads 0 extract " + d.string() + " " + d.string()).code, 1);
}

TEST(Cli, GenLabels) {
  const fs::path gt = fresh("gl_gt"), out = root() / "gl_out";
  write_file(gt / "a.gt.txt", "10,10,60,10,60,30,10,30,word\n");
  const CliRun r = run_cli("gen-labels " + gt.string() + " " + out.string() + " --width 80 --height 40");
  ASSERT_EQ(r.code, 0) << r.err;
  const ScoreMap s0 = load_pfm(out / "a.s0.pfm");
  const ScoreMap s1 = load_pfm(out / "a.s1.pfm");
  const AnnotatedScene scene{80, 40, parse_icdar(read_file(gt / "a.gt.txt"))};
  EXPECT_EQ(s0, render_score_map(scene, 0.0));
  EXPECT_EQ(s1, render_score_map(scene, 0.2));
  EXPECT_EQ(std::distance(fs::directory_iterator(out), fs::directory_iterator{}), 2);
}

TEST(Cli, GenLabelsEmptyDirWarns) {
  const fs::path gt = fresh("gl_empty");
  const CliRun r = run_cli("gen-labels " + gt.string() + " " + (root() / "gl_empty_out").string());
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("warning"), std::string::npos);
}

TEST(Cli, GenLabelsMalformedNamesFileAndLine) {
  const fs::path gt = fresh("gl_bad");
  write_file(gt / "good.gt.txt", "0,0,10,0,10,4,0,4,w\n");
  write_file(gt / "bad.gt.txt", "0,0,10,0,10,4,0,4,w\n1,2,3\n");
  const fs::path out = root() / "gl_bad_out";
  const CliRun r = run_cli("gen-labels " + gt.string() + " " + out.string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("bad.gt.txt:2"), std::string::npos) << r.err;
  EXPECT_TRUE(fs::exists(out / "good.s0.pfm"));
}

TEST(Cli, ExtractZeroAndMismatchedPairs) {
  const fs::path maps = fresh("ex_maps"), out = root() / "ex_out";
  save_pfm(maps / "0.s0.pfm", ScoreMap(32, 32));
  save_pfm(maps / "0.s1.pfm", ScoreMap(32, 32));
  save_pfm(maps / "1.s0.pfm", ScoreMap(32, 32));
  save_pfm(maps / "1.s1.pfm", ScoreMap(31, 32));
  save_pfm(maps / "2.s0.pfm", ScoreMap(8, 8));
  const CliRun r = run_cli("extract " + maps.string() + " " + out.string());
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(read_file(out / "0.det.txt"), "");
  EXPECT_FALSE(fs::exists(out / "1.det.txt"));
  EXPECT_NE(r.err.find("1:"), std::string::npos);
  EXPECT_NE(r.err.find("2.s1.pfm"), std::string::npos) << r.err;
}

TEST(Cli, EvaluateFixtures) {
  const fs::path gt = fresh("ev_gt"), det = fresh("ev_det");
  std::string g, d;
  for (int i = 0; i < 8; ++i) {
    const std::vector<TextBox> b{{axis_rect(20.0 * i, 0, 20.0 * i + 10, 5), "w", false}};
    g += write_annotations(b);
    if (i < 5) d += write_detections(std::vector<Quad>{b[0].quad});
  }
  d += write_detections(std::vector<Quad>{axis_rect(0, 100, 10, 105)});
  write_file(gt / "x.gt.txt", g);
  write_file(det / "x.det.txt", d);
  const fs::path report = root() / "report.json";
  const CliRun r = run_cli("evaluate " + det.string() + " " + gt.string() + " --report " + report.string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "P=0.833333 R=0.625000 F=0.714286\n");
  const auto j = nlohmann::json::parse(read_file(report));
  EXPECT_EQ(j["tp"], 5);
  EXPECT_EQ(j["fp"], 1);
  EXPECT_EQ(j["fn"], 3);

  write_file(det / "x.det.txt", write_detections(std::vector<Quad>{}));
  write_file(gt / "y.gt.txt", "0,0,10,0,10,5,0,5,w\n");
  EXPECT_EQ(run_cli("evaluate " + det.string() + " " + gt.string()).code, 1);
  EXPECT_EQ(run_cli("evaluate " + det.string() + " " + gt.string() + " --allow-missing").code, 0);
}

TEST(Cli, EvaluatePerfectDetections) {
  const fs::path gt = fresh("ev2_gt"), det = fresh("ev2_det");
  write_file(gt / "a.gt.txt", "0,0,10,0,10,5,0,5,w\n20,0,30,0,30,5,20,5,###\n");
  write_file(det / "a.det.txt", "0,0,10,0,10,5,0,5\n");
  const CliRun r = run_cli("evaluate " + det.string() + " " + gt.string() + " --iou 0.7");
  EXPECT_EQ(r.out, "P=1.000000 R=1.000000 F=1.000000\n");
}

TEST(Cli, SynthExtractEvaluatePipeline) {
  const fs::path corpus = root() / "pipe";
  fs::remove_all(corpus);
  ASSERT_EQ(run_cli("synth " + corpus.string() + " --n 5 --seed 3").code, 0);
  ASSERT_EQ(run_cli("extract " + (corpus / "maps").string() + " " + (corpus / "dets").string()).code, 0);
  const CliRun r = run_cli("evaluate " + (corpus / "dets").string() + " " + (corpus / "images").string());
  EXPECT_EQ(r.out, "P=1.000000 R=1.000000 F=1.000000\n") << r.err;
}

TEST(Cli, SynthConfigFileAndFlagsWin) {
  const fs::path cfg = root() / "synth.cfg";
  write_file(cfg, "[synth]\nn = 2\nwidth = 200\nheight = 120\nmax-boxes = 3\nmin-boxes = 1\nseed = 5\n");
  const fs::path out = root() / "cfg_out";
  fs::remove_all(out);
  ASSERT_EQ(run_cli("--config " + cfg.string() + " synth " + out.string() + " --seed 9").code, 0);
  const auto m = nlohmann::json::parse(read_file(out / "manifest.json"));
  EXPECT_EQ(m["image_count"], 2);
  EXPECT_EQ(m["config"]["width"], 200);
  EXPECT_EQ(m["config"]["seed"], 9);
}

TEST(Cli, OutputsIndependentOfThreadsAndRuns) {
  std::vector<std::string> trees;
  for (const char* threads : {"1", "8", "8"}) {
    const fs::path base = fresh(std::string("det_") + threads + std::to_string(trees.size()));
    const std::string t = std::string("--threads ") + threads + " ";
    ASSERT_EQ(run_cli(t + "synth " + (base / "c").string() + " --n 6 --seed 11 --noise-sigma 0.05").code, 0);
    ASSERT_EQ(run_cli(t + "gen-labels " + (base / "c/images").string() + " " + (base / "labels").string()).code, 0);
    ASSERT_EQ(run_cli(t + "extract " + (base / "c/noisy").string() + " " + (base / "dets").string()).code, 0);
    ASSERT_EQ(run_cli(t + "evaluate " + (base / "dets").string() + " " + (base / "c/images").string() + " --report " +
                   (base / "report.json").string()).code, 0);
    trees.push_back(tree_bytes(base));
  }
  EXPECT_EQ(trees[0], trees[1]);
  EXPECT_EQ(trees[1], trees[2]);
}

TEST(Cli, ThreadsFromEnvironment) {
  const fs::path a = root() / "env_a", b = root() / "env_b";
  fs::remove_all(a);
  fs::remove_all(b);
  ASSERT_EQ(run_cli("synth " + a.string() + " --n 4").code, 0);
  ASSERT_EQ(std::system(("DGST_THREADS=4 " + std::string(DGST_CLI_PATH) + " synth " + b.string() + " --n 4 >/dev/null").c_str()), 0);
  EXPECT_EQ(tree_bytes(a), tree_bytes(b));
}

TEST(Cli, Loss) {
  const fs::path d = fresh("loss");
  ScoreMap p(4, 2, 0.5f), g(4, 2, 0.0f);
  save_pfm(d / "p.s0.pfm", p);
  save_pfm(d / "p.s1.pfm", p);
  save_pfm(d / "g.s0.pfm", g);
  save_pfm(d / "g.s1.pfm", g);
  write_file(d / "scores.json", R"({"on_real": [0.9], "on_fake": [0.25, 0.75]})");
  const std::string maps = (d / "p.s0.pfm").string() + " " + (d / "p.s1.pfm").string() + " " + (d / "g.s0.pfm").string() +
                           " " + (d / "g.s1.pfm").string();
  const CliRun r = run_cli("loss " + maps + " --scores " + (d / "scores.json").string());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_DOUBLE_EQ(j["l2"].get<double>(), 0.5);
  EXPECT_NEAR(j["g_loss"].get<double>(), -(std::log(0.25) + std::log(0.75)) / 2, 1e-12);
  EXPECT_NEAR(j["d_loss"].get<double>(), -(std::log(0.9) + 0.5 * (std::log(0.75) + std::log(0.25))), 1e-12);
  EXPECT_NEAR(j["objective"].get<double>(), j["g_loss"].get<double>() + 50.0, 1e-12);

  const auto plain = nlohmann::json::parse(run_cli("loss " + maps + " --raw-l2").out);
  EXPECT_DOUBLE_EQ(plain["l2"].get<double>(), 2.0);
  EXPECT_TRUE(plain["objective"].is_null());

  save_pfm(d / "g.s1.pfm", ScoreMap(3, 2));
  EXPECT_EQ(run_cli("loss " + maps).code, 1);
}

TEST(Cli, Render) {
  const fs::path d = fresh("render");
  save_pfm(d / "m.pfm", ScoreMap(16, 8));
  ASSERT_EQ(run_cli("render " + (d / "m.png").string() + " --map " + (d / "m.pfm").string()).code, 0);
  EXPECT_EQ(read_file(d / "m.png"), encode_png(heatmap(ScoreMap(16, 8))));
  write_file(d / "g.txt", "1,1,10,1,10,5,1,5,w\n");
  write_file(d / "d.txt", "2,2,9,2,9,6,2,6\n");
  ASSERT_EQ(run_cli("render " + (d / "o.svg").string() + " --gt " + (d / "g.txt").string() + " --det " +
                 (d / "d.txt").string() + " --width 16 --height 8").code, 0);
  EXPECT_NE(read_file(d / "o.svg").find("<svg"), std::string::npos);
  EXPECT_EQ(run_cli("render " + (d / "o.bmp").string() + " --map " + (d / "m.pfm").string()).code, 1);
  EXPECT_EQ(run_cli("render " + (d / "x.png").string() + " --map " + (d / "missing.pfm").string()).code, 1);
}

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "otdet/pipeline.hpp"
#include "support/synth.hpp"

using namespace otdet;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "otdet_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(OTDET_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::size_t count_files(const fs::path& dir, const std::string& suffix) {
  std::size_t n = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::string name = entry.path().filename().string();
    if (name.size() >= suffix.size() &&
        name.substr(name.size() - suffix.size()) == suffix)
      ++n;
  }
  return n;
}

void write_scene_png(const fs::path& path, const std::string& word, double angle,
                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  synth::Placement p;
  p.word = word;
  p.center_x = 128.0;
  p.center_y = 128.0;
  p.angle_deg = angle;
  synth::Scene scene = synth::make_scene(256, 256, {p}, 1, rng);
  save_png_gray(scene.image, path.string());
}

// Strip corpus plus one CLI training run, shared by the cases that need
// model files on disk.
struct CliModels {
  fs::path text_model, nontext_model, log, text_dir, nontext_dir;
};

const CliModels& shared_cli_models() {
  static CliModels m = [] {
    CliModels out;
    fs::path root = fresh_dir("shared_models");
    out.text_dir = root / "text";
    out.nontext_dir = root / "nontext";
    fs::create_directories(out.text_dir);
    fs::create_directories(out.nontext_dir);
    std::mt19937_64 rng(41);
    const auto& words = synth::word_list();
    for (int i = 0; i < 8; ++i) {
      GrayImage strip = synth::render_word_strip(words[i % words.size()], 3.0, rng);
      save_png_gray(strip, (out.text_dir / ("t" + std::to_string(i) + ".png")).string());
      GrayImage noise = synth::render_clutter_strip(140, 30, rng);
      save_png_gray(noise,
                    (out.nontext_dir / ("n" + std::to_string(i) + ".png")).string());
    }
    out.text_model = root / "text.hmm";
    out.nontext_model = root / "nontext.hmm";
    out.log = root / "train.log";
    int code = run_cli("train --text-dir " + out.text_dir.string() + " --nontext-dir " +
                       out.nontext_dir.string() + " --model-text " +
                       out.text_model.string() + " --model-nontext " +
                       out.nontext_model.string() + " --states 2 --mixtures 2 --seed 5" +
                       " --log " + out.log.string());
    REQUIRE(code == 0);
    return out;
  }();
  return m;
}

std::string detect_flags(const CliModels& m) {
  return " --model-text " + m.text_model.string() + " --model-nontext " +
         m.nontext_model.string();
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("no arguments or bad flags exit with the usage code") {
  CHECK(run_cli("") == 2);
  CHECK(run_cli("frobnicate") == 2);
  CHECK(run_cli("detect --model-nontext missing.hmm") == 2);  // missing required flag
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("detect --help") == 0);
}

TEST_CASE("training writes models, a monotone log, and is seed-stable") {
  const CliModels& m = shared_cli_models();
  REQUIRE(fs::exists(m.text_model));
  REQUIRE(fs::exists(m.nontext_model));

  HmmModel text = load_model(m.text_model.string());
  HmmModel nontext = load_model(m.nontext_model.string());
  CHECK(text.states == 2);
  CHECK(text.mixtures == 2);
  CHECK(text.label == PatchLabel::Text);
  CHECK(nontext.label == PatchLabel::NonText);
  CHECK(text.prior == doctest::Approx(0.5));

  // Log lines are "class iteration loglik" with a non-decreasing last column.
  std::ifstream log(m.log);
  REQUIRE(log.good());
  std::string cls;
  int iter = 0;
  double ll = 0.0;
  std::string header;
  std::getline(log, header);
  double prev_text = -1e300, prev_non = -1e300;
  int rows = 0;
  while (log >> cls >> iter >> ll) {
    double& prev = (cls == "text") ? prev_text : prev_non;
    CHECK(ll >= prev - 1e-8 * std::max(1.0, std::abs(prev)));
    prev = ll;
    ++rows;
  }
  CHECK(rows >= 2);

  // Same corpus, same seed, new output paths: byte-identical model files.
  fs::path rerun = fresh_dir("train_rerun");
  int code = run_cli("train --text-dir " + m.text_dir.string() + " --nontext-dir " +
                     m.nontext_dir.string() + " --model-text " +
                     (rerun / "text.hmm").string() + " --model-nontext " +
                     (rerun / "nontext.hmm").string() +
                     " --states 2 --mixtures 2 --seed 5 --log " +
                     (rerun / "train.log").string());
  REQUIRE(code == 0);
  CHECK(slurp(rerun / "text.hmm") == slurp(m.text_model));
  CHECK(slurp(rerun / "nontext.hmm") == slurp(m.nontext_model));
}

TEST_CASE("training defaults produce six states and thirty-two mixtures") {
  const CliModels& m = shared_cli_models();
  fs::path dir = fresh_dir("train_defaults");
  int code = run_cli("train --text-dir " + m.text_dir.string() + " --nontext-dir " +
                     m.nontext_dir.string() + " --model-text " +
                     (dir / "text.hmm").string() + " --model-nontext " +
                     (dir / "nontext.hmm").string() + " --log " +
                     (dir / "train.log").string());
  REQUIRE(code == 0);
  HmmModel text = load_model((dir / "text.hmm").string());
  CHECK(text.states == 6);
  CHECK(text.mixtures == 32);
}

TEST_CASE("an empty class directory is a usage error") {
  const CliModels& m = shared_cli_models();
  fs::path dir = fresh_dir("train_empty");
  fs::create_directories(dir / "empty");
  int code = run_cli("train --text-dir " + (dir / "empty").string() + " --nontext-dir " +
                     m.nontext_dir.string() + " --model-text " +
                     (dir / "t.hmm").string() + " --model-nontext " +
                     (dir / "n.hmm").string() + " --log " + (dir / "train.log").string());
  CHECK(code == 2);
}

TEST_CASE("detect on one image writes a loadable regions file") {
  const CliModels& m = shared_cli_models();
  fs::path dir = fresh_dir("detect_single");
  fs::path img = dir / "scene.png";
  write_scene_png(img, "TEXT", 0.0, 81);
  fs::path out = dir / "out";
  fs::path overlay = dir / "overlay.png";
  int code = run_cli("detect --image " + img.string() + detect_flags(m) +
                     " --out-dir " + out.string() + " --overlay " + overlay.string() +
                     " --mask-dir " + (dir / "masks").string());
  CHECK(code == 0);
  fs::path regions = out / "scene.regions.json";
  REQUIRE(fs::exists(regions));
  LoadedRegions lr = load_regions_json(regions.string());
  CHECK(lr.width == 256);
  CHECK(lr.height == 256);
  CHECK(fs::exists(overlay));
  CHECK(count_files(dir / "masks", ".png") == lr.regions.size());
}

TEST_CASE("missing model files are a configuration error") {
  fs::path dir = fresh_dir("detect_nomodel");
  fs::path img = dir / "scene.png";
  write_scene_png(img, "LINE", 0.0, 82);
  int code = run_cli("detect --image " + img.string() + " --model-text " +
                     (dir / "absent.hmm").string() + " --model-nontext " +
                     (dir / "absent2.hmm").string() + " --out-dir " + dir.string());
  CHECK(code == 2);
}

TEST_CASE("a batch with one corrupt image still succeeds for the others") {
  const CliModels& m = shared_cli_models();
  fs::path dir = fresh_dir("detect_batch");
  fs::path images = dir / "images";
  fs::create_directories(images);
  write_scene_png(images / "a.png", "WORD", 0.0, 83);
  write_scene_png(images / "b.png", "EXIT", 30.0, 84);
  std::ofstream(images / "c.png") << "this is not a png\n";
  fs::path out = dir / "out";
  int code = run_cli("detect --image-dir " + images.string() + detect_flags(m) +
                     " --out-dir " + out.string() + " --jobs 2");
  CHECK(code == 0);
  CHECK(count_files(out, ".regions.json") == 2);
  CHECK(!fs::exists(out / "c.regions.json"));
}

TEST_CASE("a batch where every image fails reports failure") {
  const CliModels& m = shared_cli_models();
  fs::path dir = fresh_dir("detect_allfail");
  fs::path images = dir / "images";
  fs::create_directories(images);
  std::ofstream(images / "bad1.png") << "nope\n";
  std::ofstream(images / "bad2.png") << "still nope\n";
  int code = run_cli("detect --image-dir " + images.string() + detect_flags(m) +
                     " --out-dir " + (dir / "out").string());
  CHECK(code == 1);
}

TEST_CASE("eval reproduces the counts of a crafted detection set") {
  fs::path dir = fresh_dir("eval_fixture");
  fs::path dets = dir / "dets";
  fs::path gts = dir / "gts";
  fs::create_directories(dets);
  fs::create_directories(gts);

  auto rect_mask = [](int r0, int c0, int r1, int c1) {
    BinaryMask m(128, 128);
    for (int r = r0; r <= r1; ++r)
      for (int c = c0; c <= c1; ++c) m.set(r, c, true);
    return m;
  };
  auto region_of = [](const BinaryMask& m) {
    DetectedRegion region;
    region.mask = m;
    region.polygon = mask_boundary_polygon(m);
    region.score = 0.9;
    return region;
  };

  // Two images, five ground truth rows each; four hits and one stray per
  // image gives TDB 8, FDB 2, ATB 10.
  for (int image = 0; image < 2; ++image) {
    GroundTruth gt;
    DetectionResult result;
    for (int k = 0; k < 5; ++k) {
      int r0 = 10 + 22 * k;
      BinaryMask m = rect_mask(r0, 10, r0 + 10, 90);
      gt.regions.push_back({mask_boundary_polygon(m), {}});
      if (k < 4) result.regions.push_back(region_of(m));
    }
    result.regions.push_back(region_of(rect_mask(5, 100, 15, 120)));  // stray
    std::string stem = "img" + std::to_string(image);
    save_regions_json(result, 128, 128, (dets / (stem + ".regions.json")).string());
    save_ground_truth(gt, (gts / (stem + ".json")).string());
  }

  fs::path report = dir / "report.json";
  int code = run_cli("eval --detections " + dets.string() + " --gt " + gts.string() +
                     " --report " + report.string());
  REQUIRE(code == 0);
  nlohmann::json j = nlohmann::json::parse(slurp(report));
  CHECK(j["tdb"] == 8);
  CHECK(j["fdb"] == 2);
  CHECK(j["atb"] == 10);
  CHECK(j["recall"].get<double>() == doctest::Approx(0.8));
  CHECK(j["precision"].get<double>() == doctest::Approx(0.8));
  CHECK(j["f_measure"].get<double>() == doctest::Approx(0.8));
}

TEST_CASE("perfect detections score ones and empty detections score zeros") {
  fs::path dir = fresh_dir("eval_perfect");
  fs::path dets = dir / "dets";
  fs::path gts = dir / "gts";
  fs::create_directories(dets);
  fs::create_directories(gts);

  BinaryMask m(64, 64);
  for (int r = 20; r <= 30; ++r)
    for (int c = 10; c <= 50; ++c) m.set(r, c, true);
  GroundTruth gt;
  gt.regions.push_back({mask_boundary_polygon(m), {}});
  save_ground_truth(gt, (gts / "one.json").string());
  DetectionResult res;
  DetectedRegion region;
  region.mask = m;
  region.polygon = mask_boundary_polygon(m);
  res.regions.push_back(region);
  save_regions_json(res, 64, 64, (dets / "one.regions.json").string());

  fs::path report = dir / "report.json";
  REQUIRE(run_cli("eval --detections " + dets.string() + " --gt " + gts.string() +
                  " --report " + report.string()) == 0);
  nlohmann::json j = nlohmann::json::parse(slurp(report));
  CHECK(j["recall"].get<double>() == 1.0);
  CHECK(j["precision"].get<double>() == 1.0);
  CHECK(j["mdb"] == 0);

  // Same ground truth, but the detection file lists no regions at all.
  save_regions_json(DetectionResult{}, 64, 64, (dets / "one.regions.json").string());
  REQUIRE(run_cli("eval --detections " + dets.string() + " --gt " + gts.string() +
                  " --report " + report.string()) == 0);
  j = nlohmann::json::parse(slurp(report));
  CHECK(j["recall"].get<double>() == 0.0);
  CHECK(j["tdb"] == 0);
}

TEST_CASE("orphaned files between the two directories are an error") {
  fs::path dir = fresh_dir("eval_orphan");
  fs::path dets = dir / "dets";
  fs::path gts = dir / "gts";
  fs::create_directories(dets);
  fs::create_directories(gts);
  save_regions_json(DetectionResult{}, 64, 64, (dets / "a.regions.json").string());
  save_ground_truth(GroundTruth{}, (gts / "b.json").string());
  CHECK(run_cli("eval --detections " + dets.string() + " --gt " + gts.string() +
                " --report " + (dir / "r.json").string()) == 2);

  // An empty detections directory is also an error.
  fs::path none = dir / "none";
  fs::create_directories(none);
  CHECK(run_cli("eval --detections " + none.string() + " --gt " + gts.string() +
                " --report " + (dir / "r2.json").string()) == 2);
}

TEST_CASE("inspect writes every stage and rejects unknown ones") {
  fs::path dir = fresh_dir("inspect");
  fs::path img = dir / "scene.png";
  write_scene_png(img, "CURVE", 0.0, 85);
  for (const std::string stage : {"filtered", "mdmap", "cluster", "skeleton", "patches"}) {
    fs::path out = dir / (stage + ".png");
    CHECK(run_cli("inspect --image " + img.string() + " --stage " + stage + " --out " +
                  out.string()) == 0);
    CHECK(fs::exists(out));
    CHECK(fs::file_size(out) > 0);
  }
  CHECK(run_cli("inspect --image " + img.string() + " --stage nonsense --out " +
                (dir / "x.png").string()) == 2);
}

TEST_CASE("the maximum-difference map of a flat image is all black") {
  fs::path dir = fresh_dir("inspect_flat");
  GrayImage flat(96, 64, 170.0);
  fs::path img = dir / "flat.png";
  save_png_gray(flat, img.string());
  fs::path out = dir / "mdmap.png";
  REQUIRE(run_cli("inspect --image " + img.string() + " --stage mdmap --out " +
                  out.string()) == 0);
  GrayImage md = load_gray(out.string());
  for (int r = 0; r < md.height; ++r)
    for (int c = 0; c < md.width; ++c) CHECK(md.at(r, c) == 0.0);
}

// otdet: oriented and curved text line detector.
//
// Subcommands:
//   detect   run the full detector on an image or directory
//   train    fit the text / non-text verification models from patch strips
//   eval     score detection output against ground truth polygons
//   inspect  dump a pipeline intermediate as an image

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "otdet/pipeline.hpp"

namespace fs = std::filesystem;
using namespace otdet;

namespace {

struct DetectArgs {
  std::string image, image_dir, model_text, model_nontext;
  std::string out_dir = ".";
  std::string overlay, mask_dir, config;
  int jobs = 1;
};

struct TrainArgs {
  std::string text_dir, nontext_dir, model_text, model_nontext;
  std::string log = "train.log", config;
  int states = 6, mixtures = 32, jobs = 1;
  std::uint64_t seed = 0;
};

struct EvalArgs {
  std::string detections, gt, config;
  std::string report = "eval_report.json";
};

struct InspectArgs {
  std::string image, stage, out, config;
};

PipelineConfig config_or_default(const std::string& path) {
  if (path.empty()) return {};
  return load_config(path);
}

std::vector<fs::path> list_images(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png" || ext == ".pgm") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void draw_polygon(RgbImage& img, const std::vector<PointXY>& poly, std::uint8_t r,
                  std::uint8_t g, std::uint8_t b) {
  if (poly.empty()) return;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const PointXY& a = poly[i];
    const PointXY& t = poly[(i + 1) % poly.size()];
    Pixel pa{static_cast<int>(std::lround(a.y)), static_cast<int>(std::lround(a.x))};
    Pixel pb{static_cast<int>(std::lround(t.y)), static_cast<int>(std::lround(t.x))};
    for (const Pixel& p : bresenham_line(pa, pb))
      if (p.row >= 0 && p.row < img.height && p.col >= 0 && p.col < img.width)
        img.set(p.row, p.col, r, g, b);
  }
}

GrayImage mask_image(const BinaryMask& mask) {
  GrayImage out(mask.width, mask.height);
  for (int r = 0; r < mask.height; ++r)
    for (int c = 0; c < mask.width; ++c) out.at(r, c) = mask.at(r, c) ? 255.0 : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// detect

int cmd_detect(const DetectArgs& a) {
  PipelineConfig cfg = config_or_default(a.config);
  if (a.jobs > 0) cfg.train.jobs = a.jobs;

  ModelPair models;
  try {
    models.text = load_model(a.model_text);
    models.nontext = load_model(a.model_nontext);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  if (models.text.label != PatchLabel::Text || models.nontext.label != PatchLabel::NonText)
    std::cerr << "warning: model labels do not match their roles\n";

  std::vector<fs::path> inputs;
  bool batch = !a.image_dir.empty();
  if (batch) {
    inputs = list_images(a.image_dir);
    if (inputs.empty()) {
      std::cerr << "error: no .png or .pgm images in " << a.image_dir << "\n";
      return 2;
    }
  } else {
    inputs.push_back(a.image);
  }

  fs::create_directories(a.out_dir);
  if (!a.mask_dir.empty()) fs::create_directories(a.mask_dir);
  if (batch && !a.overlay.empty()) fs::create_directories(a.overlay);

  std::atomic<std::size_t> next{0};
  std::atomic<int> failures{0};
  std::mutex log_mutex;

  auto process = [&](const fs::path& input) {
    std::string stem = input.stem().string();
    try {
      GrayImage img = load_gray(input.string());
      DetectionResult result = detect(img, models, cfg);
      fs::path out = fs::path(a.out_dir) / (stem + ".regions.json");
      save_regions_json(result, img.width, img.height, out.string());
      if (!a.overlay.empty()) {
        RgbImage overlay = to_rgb(img);
        for (const auto& region : result.regions)
          draw_polygon(overlay, region.polygon, 255, 0, 0);
        fs::path opath = batch ? fs::path(a.overlay) / (stem + ".overlay.png")
                               : fs::path(a.overlay);
        save_png_rgb(overlay, opath.string());
      }
      if (!a.mask_dir.empty()) {
        int k = 0;
        for (const auto& region : result.regions) {
          fs::path mpath =
              fs::path(a.mask_dir) / (stem + ".mask" + std::to_string(k++) + ".png");
          save_png_gray(mask_image(region.mask), mpath.string());
        }
      }
      std::lock_guard<std::mutex> lock(log_mutex);
      std::cout << stem << ": " << result.regions.size() << " region(s), "
                << result.rejected << " rejected\n";
    } catch (const std::exception& e) {
      ++failures;
      std::lock_guard<std::mutex> lock(log_mutex);
      std::cerr << "error: " << input.string() << ": " << e.what() << "\n";
    }
  };

  int workers = std::max(1, std::min<int>(a.jobs, static_cast<int>(inputs.size())));
  if (workers == 1) {
    for (const auto& input : inputs) process(input);
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < workers; ++i)
      pool.emplace_back([&] {
        for (;;) {
          std::size_t k = next.fetch_add(1);
          if (k >= inputs.size()) return;
          process(inputs[k]);
        }
      });
    for (auto& t : pool) t.join();
  }
  return failures == static_cast<int>(inputs.size()) ? 1 : 0;
}

// ---------------------------------------------------------------------------
// train

int cmd_train(const TrainArgs& a) {
  PipelineConfig cfg = config_or_default(a.config);
  cfg.train.states = a.states;
  cfg.train.mixtures = a.mixtures;
  cfg.train.seed = a.seed;
  cfg.train.jobs = std::max(1, a.jobs);

  auto load_class = [&](const std::string& dir) {
    std::vector<FeatureSequence> seqs;
    std::vector<fs::path> files = list_images(dir);
    for (const auto& file : files) {
      try {
        GrayImage strip = load_gray(file.string());
        int w = std::max(
            1, static_cast<int>(std::lround(static_cast<double>(strip.width) *
                                            cfg.phog.window_height / strip.height)));
        strip = resize_bilinear(strip, w, cfg.phog.window_height);
        if (strip.width < cfg.phog.window_width) {
          std::cerr << "warning: " << file.string() << ": too narrow, skipped\n";
          continue;
        }
        FeatureSequence seq = phog_sequence(strip, cfg.phog);
        seq.id = file.stem().string();
        seqs.push_back(std::move(seq));
      } catch (const std::exception& e) {
        std::cerr << "warning: " << file.string() << ": " << e.what() << "\n";
      }
    }
    return seqs;
  };

  std::vector<FeatureSequence> text_seqs = load_class(a.text_dir);
  std::vector<FeatureSequence> nontext_seqs = load_class(a.nontext_dir);
  if (text_seqs.empty() || nontext_seqs.empty()) {
    std::cerr << "error: need at least one usable patch per class\n";
    return 2;
  }

  std::ofstream log(a.log);
  if (!log) {
    std::cerr << "error: cannot open log file " << a.log << "\n";
    return 2;
  }
  log << "# class iteration loglik\n";

  double total = static_cast<double>(text_seqs.size() + nontext_seqs.size());
  ModelPair models;
  struct Job {
    const char* name;
    const std::vector<FeatureSequence>* seqs;
    HmmModel* model;
    PatchLabel label;
  };
  Job jobs[2] = {{"text", &text_seqs, &models.text, PatchLabel::Text},
                 {"nontext", &nontext_seqs, &models.nontext, PatchLabel::NonText}};
  for (const Job& job : jobs) {
    TrainResult tr = train(*job.seqs, cfg.train);
    *job.model = std::move(tr.model);
    job.model->label = job.label;
    job.model->prior = static_cast<double>(job.seqs->size()) / total;
    for (std::size_t i = 0; i < tr.loglik_history.size(); ++i)
      log << job.name << " " << i << " " << std::setprecision(17)
          << tr.loglik_history[i] << "\n";
    std::cout << job.name << ": " << job.seqs->size() << " sequence(s), "
              << tr.loglik_history.size() << " iteration(s), " << tr.skipped_sequences
              << " skipped\n";
  }
  save_model(models.text, a.model_text);
  save_model(models.nontext, a.model_nontext);
  return 0;
}

// ---------------------------------------------------------------------------
// eval

int cmd_eval(const EvalArgs& a) {
  PipelineConfig cfg = config_or_default(a.config);

  auto stem_of = [](const fs::path& p, const std::string& suffix) -> std::optional<std::string> {
    std::string name = p.filename().string();
    if (name.size() <= suffix.size() || name.substr(name.size() - suffix.size()) != suffix)
      return std::nullopt;
    return name.substr(0, name.size() - suffix.size());
  };

  std::map<std::string, fs::path> det_files, gt_files;
  for (const auto& entry : fs::directory_iterator(a.detections))
    if (entry.is_regular_file())
      if (auto stem = stem_of(entry.path(), ".regions.json")) det_files[*stem] = entry.path();
  for (const auto& entry : fs::directory_iterator(a.gt))
    if (entry.is_regular_file())
      if (auto stem = stem_of(entry.path(), ".json")) gt_files[*stem] = entry.path();

  std::vector<std::string> orphans;
  for (const auto& [stem, path] : det_files)
    if (!gt_files.count(stem)) orphans.push_back(path.string());
  for (const auto& [stem, path] : gt_files)
    if (!det_files.count(stem)) orphans.push_back(path.string());
  if (det_files.empty() || !orphans.empty()) {
    if (det_files.empty()) std::cerr << "error: no *.regions.json files in " << a.detections << "\n";
    for (const auto& o : orphans) std::cerr << "error: unmatched file: " << o << "\n";
    return 2;
  }

  EvalCounts counts;
  for (const auto& [stem, path] : det_files) {
    LoadedRegions lr = load_regions_json(path.string());
    GroundTruth gt = load_ground_truth(gt_files[stem].string());
    std::vector<BinaryMask> masks;
    masks.reserve(lr.regions.size());
    for (const auto& region : lr.regions) masks.push_back(region.mask);
    counts += match_blocks(masks, gt, lr.width, lr.height, cfg.eval);
  }
  EvalReport report = metrics(counts);

  std::cout << "ATB " << counts.atb << "  TDB " << counts.tdb << "  FDB " << counts.fdb
            << "  MDB " << counts.mdb << "\n";
  std::cout << "recall " << report.recall << "  precision " << report.precision
            << "  f_measure " << report.f_measure << "\n";

  nlohmann::json j;
  j["atb"] = counts.atb;
  j["tdb"] = counts.tdb;
  j["fdb"] = counts.fdb;
  j["mdb"] = counts.mdb;
  j["recall"] = report.recall;
  j["precision"] = report.precision;
  j["f_measure"] = report.f_measure;
  std::ofstream f(a.report);
  if (!f) {
    std::cerr << "error: cannot open report file " << a.report << "\n";
    return 2;
  }
  f << j.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// inspect

int cmd_inspect(const InspectArgs& a) {
  PipelineConfig cfg = config_or_default(a.config);
  GrayImage img = load_gray(a.image);
  CandidateStages st = run_candidate_stages(img, cfg);

  std::string out = a.out;
  if (out.empty()) out = fs::path(a.image).stem().string() + "." + a.stage + ".png";

  if (a.stage == "filtered") {
    save_png_gray(st.filtered, out);
  } else if (a.stage == "mdmap") {
    GrayImage md(st.md.width, st.md.height);
    for (int r = 0; r < md.height; ++r)
      for (int c = 0; c < md.width; ++c) md.at(r, c) = st.md.at(r, c);
    save_png_gray(md, out);
  } else if (a.stage == "cluster") {
    save_png_gray(mask_image(st.cluster.mask), out);
  } else if (a.stage == "skeleton") {
    RgbImage canvas = to_rgb(img);
    for (auto& byte : canvas.rgb) byte /= 3;  // dim the base image
    for (const auto& sk : st.skeletons) {
      for (const Pixel& p : sk.pixels) canvas.set(p.row, p.col, 255, 255, 255);
      for (const Pixel& p : sk.junctions) canvas.set(p.row, p.col, 255, 64, 64);
      for (const Pixel& p : sk.endpoints) canvas.set(p.row, p.col, 64, 255, 64);
    }
    save_png_rgb(canvas, out);
  } else if (a.stage == "patches") {
    RgbImage canvas = to_rgb(img);
    for (auto& byte : canvas.rgb) byte /= 3;
    static const std::uint8_t palette[6][3] = {{230, 80, 80},  {80, 200, 80},
                                               {90, 120, 255}, {230, 200, 60},
                                               {200, 90, 220}, {70, 210, 210}};
    int k = 0;
    for (const auto& sk : st.skeletons) {
      const std::uint8_t* color = palette[k++ % 6];
      try {
        TextPatch patch = make_patch(img, sk, cfg.symmetry);
        for (int r = 0; r < patch.mask.height; ++r)
          for (int c = 0; c < patch.mask.width; ++c)
            if (patch.mask.at(r, c)) canvas.set(r, c, color[0], color[1], color[2]);
      } catch (const std::exception& e) {
        std::cerr << "warning: patch skipped: " << e.what() << "\n";
      }
    }
    save_png_rgb(canvas, out);
  } else {
    std::cerr << "error: unknown stage: " << a.stage << "\n";
    return 2;
  }
  std::cout << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Oriented and curved text line detector"};
  app.require_subcommand(1);

  DetectArgs da;
  CLI::App* detect_cmd = app.add_subcommand("detect", "Detect text lines in images");
  auto* img_opt = detect_cmd->add_option("--image", da.image, "Input image (PNG or PGM)");
  auto* dir_opt =
      detect_cmd->add_option("--image-dir", da.image_dir, "Directory of input images");
  img_opt->excludes(dir_opt);
  detect_cmd->add_option("--model-text", da.model_text, "Text model file")->required();
  detect_cmd->add_option("--model-nontext", da.model_nontext, "Non-text model file")
      ->required();
  detect_cmd->add_option("--out-dir", da.out_dir, "Directory for regions JSON files");
  detect_cmd->add_option("--overlay", da.overlay,
                         "Overlay PNG path (single image) or directory (batch)");
  detect_cmd->add_option("--mask-dir", da.mask_dir, "Directory for per-region mask PNGs");
  detect_cmd->add_option("--config", da.config, "Pipeline config file");
  detect_cmd->add_option("--jobs", da.jobs, "Worker threads for batch runs");
  detect_cmd->callback([&] {
    if (da.image.empty() && da.image_dir.empty())
      throw CLI::RequiredError("--image or --image-dir");
  });

  TrainArgs ta;
  CLI::App* train_cmd =
      app.add_subcommand("train", "Train verification models from patch strips");
  train_cmd->add_option("--text-dir", ta.text_dir, "Directory of text strips")->required();
  train_cmd->add_option("--nontext-dir", ta.nontext_dir, "Directory of non-text strips")
      ->required();
  train_cmd->add_option("--model-text", ta.model_text, "Output text model")->required();
  train_cmd->add_option("--model-nontext", ta.model_nontext, "Output non-text model")
      ->required();
  train_cmd->add_option("--states", ta.states, "HMM state count");
  train_cmd->add_option("--mixtures", ta.mixtures, "Gaussians per state");
  train_cmd->add_option("--seed", ta.seed, "Random seed");
  train_cmd->add_option("--jobs", ta.jobs, "Worker threads");
  train_cmd->add_option("--log", ta.log, "Training log path");
  train_cmd->add_option("--config", ta.config, "Pipeline config file");

  EvalArgs ea;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Evaluate detections against ground truth");
  eval_cmd->add_option("--detections", ea.detections, "Directory of *.regions.json files")
      ->required();
  eval_cmd->add_option("--gt", ea.gt, "Directory of ground truth *.json files")->required();
  eval_cmd->add_option("--report", ea.report, "Report JSON output path");
  eval_cmd->add_option("--config", ea.config, "Pipeline config file");

  InspectArgs ia;
  CLI::App* inspect_cmd = app.add_subcommand("inspect", "Dump a pipeline intermediate");
  inspect_cmd->add_option("--image", ia.image, "Input image")->required();
  inspect_cmd
      ->add_option("--stage", ia.stage, "One of: filtered, mdmap, cluster, skeleton, patches")
      ->required()
      ->check(CLI::IsMember({"filtered", "mdmap", "cluster", "skeleton", "patches"}));
  inspect_cmd->add_option("--out", ia.out, "Output PNG path");
  inspect_cmd->add_option("--config", ia.config, "Pipeline config file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (detect_cmd->parsed()) return cmd_detect(da);
    if (train_cmd->parsed()) return cmd_train(ta);
    if (eval_cmd->parsed()) return cmd_eval(ea);
    if (inspect_cmd->parsed()) return cmd_inspect(ia);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

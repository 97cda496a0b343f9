#include "otdet/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace otdet {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

void apply_key(PipelineConfig& cfg, const std::string& key, const nlohmann::json& v) {
  auto num = [&]() -> double {
    if (!v.is_number()) throw FormatError("config key '" + key + "' needs a number");
    return v.get<double>();
  };
  auto integer = [&]() -> int {
    if (!v.is_number_integer()) throw FormatError("config key '" + key + "' needs an integer");
    return v.get<int>();
  };
  auto boolean = [&]() -> bool {
    if (!v.is_boolean()) throw FormatError("config key '" + key + "' needs true or false");
    return v.get<bool>();
  };
  auto word = [&]() -> std::string {
    if (!v.is_string()) throw FormatError("config key '" + key + "' needs a string");
    return v.get<std::string>();
  };

  if (key == "lowpass_radius") cfg.filter.lowpass_radius = num();
  else if (key == "log_sigma") cfg.filter.log_sigma = num();
  else if (key == "md_divisor") cfg.md_divisor = integer();
  else if (key == "md_floor") cfg.md_floor = integer();
  else if (key == "opening_size") cfg.opening_size = integer();
  else if (key == "branch_ratio") cfg.prune.branch_ratio = num();
  else if (key == "fragment_ratio") cfg.prune.fragment_ratio = num();
  else if (key == "fragment_floor") cfg.prune.fragment_floor = num();
  else if (key == "join_ratio") cfg.prune.join_ratio = num();
  else if (key == "symmetry_mode") {
    std::string w = word();
    if (w == "scaled") cfg.symmetry = SymmetryMode::Scaled;
    else if (w == "relative") cfg.symmetry = SymmetryMode::Relative;
    else throw FormatError("symmetry_mode must be 'scaled' or 'relative'");
  } else if (key == "window_height") cfg.phog.window_height = integer();
  else if (key == "window_width") cfg.phog.window_width = integer();
  else if (key == "overlap") cfg.phog.overlap = num();
  else if (key == "levels") cfg.phog.levels = integer();
  else if (key == "bins") cfg.phog.bins = integer();
  else if (key == "per_level_norm") cfg.phog.per_level_norm = boolean();
  else if (key == "t_v") cfg.verify.t_v = num();
  else if (key == "score_mode") {
    std::string w = word();
    if (w == "per_frame") cfg.score_mode = ScoreMode::PerFrame;
    else if (w == "raw") cfg.score_mode = ScoreMode::Raw;
    else throw FormatError("score_mode must be 'per_frame' or 'raw'");
  } else if (key == "states") cfg.train.states = integer();
  else if (key == "mixtures") cfg.train.mixtures = integer();
  else if (key == "seed") cfg.train.seed = v.get<std::uint64_t>();
  else if (key == "max_iters") cfg.train.max_iters = integer();
  else if (key == "rel_tol") cfg.train.rel_tol = num();
  else if (key == "left_to_right") cfg.train.left_to_right = boolean();
  else if (key == "jobs") cfg.train.jobs = integer();
  else if (key == "min_overlap") cfg.eval.min_overlap = num();
  else if (key == "miss_fraction") cfg.eval.miss_fraction = num();
  else throw FormatError("unknown config key: " + key);
}

}  // namespace

PipelineConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open file: " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  std::string text = buf.str();

  PipelineConfig cfg;
  std::string body = trim(text);
  if (!body.empty() && body[0] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("bad config JSON: ") + e.what());
    }
    if (!j.is_object()) throw FormatError("config JSON must be an object: " + path);
    for (const auto& [key, value] : j.items()) apply_key(cfg, key, value);
    return cfg;
  }

  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw FormatError("config line is not key=value: " + t);
    std::string key = trim(t.substr(0, eq));
    std::string val = trim(t.substr(eq + 1));
    nlohmann::json v;
    try {
      v = nlohmann::json::parse(val);  // numbers and booleans
    } catch (const nlohmann::json::exception&) {
      v = val;  // bare words are strings
    }
    apply_key(cfg, key, v);
  }
  return cfg;
}

void save_config(const PipelineConfig& cfg, const std::string& path) {
  nlohmann::json j;
  j["lowpass_radius"] = cfg.filter.lowpass_radius;
  j["log_sigma"] = cfg.filter.log_sigma;
  j["md_divisor"] = cfg.md_divisor;
  j["md_floor"] = cfg.md_floor;
  j["opening_size"] = cfg.opening_size;
  j["branch_ratio"] = cfg.prune.branch_ratio;
  j["fragment_ratio"] = cfg.prune.fragment_ratio;
  j["fragment_floor"] = cfg.prune.fragment_floor;
  j["join_ratio"] = cfg.prune.join_ratio;
  j["symmetry_mode"] = cfg.symmetry == SymmetryMode::Scaled ? "scaled" : "relative";
  j["window_height"] = cfg.phog.window_height;
  j["window_width"] = cfg.phog.window_width;
  j["overlap"] = cfg.phog.overlap;
  j["levels"] = cfg.phog.levels;
  j["bins"] = cfg.phog.bins;
  j["per_level_norm"] = cfg.phog.per_level_norm;
  j["t_v"] = cfg.verify.t_v;
  j["score_mode"] = cfg.score_mode == ScoreMode::PerFrame ? "per_frame" : "raw";
  j["states"] = cfg.train.states;
  j["mixtures"] = cfg.train.mixtures;
  j["seed"] = cfg.train.seed;
  j["max_iters"] = cfg.train.max_iters;
  j["rel_tol"] = cfg.train.rel_tol;
  j["left_to_right"] = cfg.train.left_to_right;
  j["jobs"] = cfg.train.jobs;
  j["min_overlap"] = cfg.eval.min_overlap;
  j["miss_fraction"] = cfg.eval.miss_fraction;
  std::ofstream f(path);
  if (!f) throw IoError("cannot open file for writing: " + path);
  f << j.dump(2) << "\n";
}

CandidateStages run_candidate_stages(const GrayImage& img, const PipelineConfig& cfg) {
  CandidateStages st;
  st.filtered = fourier_log(img, cfg.filter);
  int n = md_window_length(img.width, img.height, cfg.md_divisor, cfg.md_floor);
  st.md = md_map(st.filtered, n);
  st.cluster = kmeans_2(st.md);
  st.opened = morph_open(st.cluster.mask, cfg.opening_size);

  std::vector<SkeletonGraph> split;
  for (const Component& comp : connected_components(st.opened)) {
    SkeletonGraph sk = thin(comp);
    for (auto& part : split_long_branches(sk, cfg.prune)) split.push_back(std::move(part));
  }
  st.skeletons = prune_fragments(split, cfg.prune);
  return st;
}

namespace {

DetectedRegion region_from_patch(const TextPatch& patch, double score) {
  DetectedRegion region;
  region.mask = patch.mask;
  region.polygon = mask_boundary_polygon(patch.mask);
  region.score = score;
  region.width = patch.width.width;
  region.curve = patch.curve.coeff;
  return region;
}

struct JoinPartner {
  std::size_t pool_index = 0;
  Pixel from;  // endpoint of the querying skeleton
  Pixel to;    // attachment pixel on the partner
  double distance = 0.0;
};

/// Partners reachable under the radius rule. Besides endpoint-to-endpoint
/// pairs, an endpoint resting on or next to another skeleton's body counts:
/// that is what pieces separated at a junction look like, and they must
/// re-enter arbitration even though the body has no endpoint at the cut.
std::vector<JoinPartner> join_partners(const SkeletonGraph& sk,
                                       const std::vector<SkeletonGraph>& pool,
                                       const PruneParams& prune) {
  std::vector<JoinPartner> out;
  double radius = prune.join_ratio * sk.length;
  for (std::size_t j = 0; j < pool.size(); ++j) {
    JoinPartner best;
    best.distance = std::numeric_limits<double>::infinity();
    for (const Pixel& e : sk.endpoints)
      for (const Pixel& q : pool[j].pixels) {
        double d = std::hypot(e.row - q.row, e.col - q.col);
        if (d < best.distance) best = {j, e, q, d};
      }
    if (best.distance <= radius) out.push_back(best);
  }
  return out;
}

/// Joins unambiguous near pairs; skeletons with several in-radius partners
/// are left untouched (arbitration needs models). Each merge restarts the
/// scan and shrinks the live set, so the loop terminates.
std::vector<SkeletonGraph> geometric_join(std::vector<SkeletonGraph> work,
                                          const PruneParams& prune, int* joins) {
  std::vector<char> alive(work.size(), 1);
  std::size_t max_rounds = work.size() + 4;
  for (std::size_t round = 0; round < max_rounds; ++round) {
    bool changed = false;
    for (std::size_t i = 0; i < work.size() && !changed; ++i) {
      if (!alive[i]) continue;
      std::vector<SkeletonGraph> pool;
      std::vector<std::size_t> pool_ids;
      for (std::size_t j = 0; j < work.size(); ++j)
        if (j != i && alive[j]) {
          pool.push_back(work[j]);
          pool_ids.push_back(j);
        }
      if (pool.empty()) break;
      auto partners = join_partners(work[i], pool, prune);
      if (partners.size() != 1) continue;

      std::size_t j = pool_ids[partners[0].pool_index];
      SkeletonGraph merged =
          merge_skeletons(work[i], work[j], partners[0].from, partners[0].to);
      alive[i] = 0;
      alive[j] = 0;
      work.push_back(std::move(merged));
      alive.push_back(1);
      changed = true;
      if (joins) ++*joins;
    }
    if (!changed) break;
  }
  std::vector<SkeletonGraph> kept;
  for (std::size_t i = 0; i < work.size(); ++i)
    if (alive[i]) kept.push_back(std::move(work[i]));
  return kept;
}

}  // namespace

std::vector<TextPatch> candidate_patches(const GrayImage& img, const PipelineConfig& cfg) {
  CandidateStages st = run_candidate_stages(img, cfg);
  std::vector<SkeletonGraph> kept = geometric_join(std::move(st.skeletons), cfg.prune, nullptr);
  std::vector<TextPatch> out;
  for (const auto& sk : kept) {
    try {
      out.push_back(make_patch(img, sk, cfg.symmetry));
    } catch (const std::exception&) {
      // degenerate geometry: no patch
    }
  }
  return out;
}

DetectionResult detect(const GrayImage& img, const ModelPair& models,
                       const PipelineConfig& cfg) {
  DetectionResult out;
  CandidateStages st = run_candidate_stages(img, cfg);
  std::vector<SkeletonGraph> work = std::move(st.skeletons);
  std::vector<char> alive(work.size(), 1);

  auto scorer = [&](const SkeletonGraph& sk) -> double {
    try {
      TextPatch patch = make_patch(img, sk, cfg.symmetry);
      return verify_patch(patch, models, cfg.verify, cfg.phog, cfg.score_mode).score;
    } catch (const std::exception&) {
      return 0.0;
    }
  };

  // Join phase with model arbitration. Every structural change restarts the
  // scan and removes at least one live skeleton, so the loop terminates.
  std::size_t max_rounds = 2 * work.size() + 4;
  for (std::size_t round = 0; round < max_rounds; ++round) {
    bool changed = false;
    for (std::size_t i = 0; i < work.size() && !changed; ++i) {
      if (!alive[i]) continue;
      std::vector<SkeletonGraph> pool;
      std::vector<std::size_t> pool_ids;
      for (std::size_t j = 0; j < work.size(); ++j)
        if (j != i && alive[j]) {
          pool.push_back(work[j]);
          pool_ids.push_back(j);
        }
      if (pool.empty()) break;
      auto partners = join_partners(work[i], pool, cfg.prune);
      if (partners.empty()) continue;
      std::set<std::size_t> near;
      for (const auto& c : partners) near.insert(pool_ids[c.pool_index]);

      std::vector<SkeletonGraph> group{work[i]};
      std::vector<std::size_t> gids{i};
      for (std::size_t id : near) {
        group.push_back(work[id]);
        gids.push_back(id);
      }
      JunctionResolution res = resolve_junction(group, scorer, cfg.verify);
      for (std::size_t d : res.discarded) {
        alive[gids[d]] = 0;
        changed = true;
      }
      if (res.merged && res.joined.size() >= 2) {
        for (std::size_t jx : res.joined) alive[gids[jx]] = 0;
        work.push_back(std::move(*res.merged));
        alive.push_back(1);
        changed = true;
      }
      if (changed) ++out.junctions_resolved;
    }
    if (!changed) break;
  }

  for (std::size_t i = 0; i < work.size(); ++i) {
    if (!alive[i]) continue;
    ++out.candidates;
    try {
      TextPatch patch = make_patch(img, work[i], cfg.symmetry);
      VerifiedRegion vr = verify_patch(patch, models, cfg.verify, cfg.phog, cfg.score_mode);
      if (!vr.accepted) {
        ++out.rejected;
        continue;
      }
      out.regions.push_back(region_from_patch(patch, vr.score));
    } catch (const std::exception&) {
      ++out.rejected;  // degenerate geometry counts as a rejection
    }
  }
  return out;
}

DetectionResult detect_without_verification(const GrayImage& img,
                                            const PipelineConfig& cfg) {
  DetectionResult out;
  CandidateStages st = run_candidate_stages(img, cfg);
  std::vector<SkeletonGraph> kept =
      geometric_join(std::move(st.skeletons), cfg.prune, &out.junctions_resolved);
  for (const auto& sk : kept) {
    ++out.candidates;
    try {
      TextPatch patch = make_patch(img, sk, cfg.symmetry);
      out.regions.push_back(region_from_patch(patch, 1.0));
    } catch (const std::exception&) {
      ++out.rejected;
    }
  }
  return out;
}

void save_regions_json(const DetectionResult& result, int width, int height,
                       const std::string& path) {
  nlohmann::json j;
  j["width"] = width;
  j["height"] = height;
  j["regions"] = nlohmann::json::array();
  for (const auto& region : result.regions) {
    nlohmann::json r;
    r["polygon"] = nlohmann::json::array();
    for (const auto& pt : region.polygon) r["polygon"].push_back({pt.x, pt.y});
    r["score"] = region.score;
    r["stroke_width"] = region.width;
    r["curve"] = region.curve;
    j["regions"].push_back(std::move(r));
  }
  std::ofstream f(path);
  if (!f) throw IoError("cannot open file for writing: " + path);
  f << j.dump(2) << "\n";
}

LoadedRegions load_regions_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open file: " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad regions JSON: ") + e.what());
  }
  LoadedRegions out;
  out.width = j.at("width").get<int>();
  out.height = j.at("height").get<int>();
  for (const auto& r : j.at("regions")) {
    DetectedRegion region;
    for (const auto& pt : r.at("polygon"))
      region.polygon.push_back({pt[0].get<double>(), pt[1].get<double>()});
    region.score = r.value("score", 0.0);
    region.width = r.value("stroke_width", 0.0);
    if (r.contains("curve")) {
      auto c = r["curve"].get<std::vector<double>>();
      for (std::size_t k = 0; k < region.curve.size() && k < c.size(); ++k)
        region.curve[k] = c[k];
    }
    region.mask = rasterize_polygon(region.polygon, out.width, out.height);
    out.regions.push_back(std::move(region));
  }
  return out;
}

}  // namespace otdet

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "otdet/evalproto.hpp"
#include "otdet/freqfilter.hpp"
#include "otdet/hmm.hpp"
#include "otdet/patchgeom.hpp"
#include "otdet/phog.hpp"
#include "otdet/skeleton.hpp"
#include "otdet/textmap.hpp"
#include "otdet/verify.hpp"

namespace otdet {

struct PipelineConfig {
  FilterParams filter;
  int md_divisor = 20;
  int md_floor = 7;
  int opening_size = 3;
  PruneParams prune;
  SymmetryMode symmetry = SymmetryMode::Scaled;
  PhogParams phog;
  VerifyParams verify;
  ScoreMode score_mode = ScoreMode::PerFrame;
  TrainOptions train;
  MatchParams eval;
};

/// Reads a config file, JSON ({"key": value}) or flat key=value lines.
/// Unknown keys are an error; missing keys keep their defaults.
PipelineConfig load_config(const std::string& path);
void save_config(const PipelineConfig& cfg, const std::string& path);

/// One detected region.
struct DetectedRegion {
  BinaryMask mask;
  std::vector<PointXY> polygon;
  double score = 0.0;
  double width = 0.0;
  std::array<double, 5> curve{};
};

struct DetectionResult {
  std::vector<DetectedRegion> regions;
  int candidates = 0;       // skeletons that reached scoring
  int rejected = 0;         // candidates rejected by verification
  int junctions_resolved = 0;
};

/// Everything up to and including skeleton pruning, before any model is
/// consulted. Exposed for stage inspection.
struct CandidateStages {
  GrayImage filtered;
  MDMap md;
  ClusterResult cluster;
  BinaryMask opened;
  std::vector<SkeletonGraph> skeletons;  // split and pruned, row-major order
};

CandidateStages run_candidate_stages(const GrayImage& img, const PipelineConfig& cfg);

/// Candidate patches after the geometric join pass, before any model is
/// consulted. This is the patch stream the ablation path accepts and the
/// natural source of training strips.
std::vector<TextPatch> candidate_patches(const GrayImage& img, const PipelineConfig& cfg);

/// Full detection with model verification and junction arbitration.
DetectionResult detect(const GrayImage& img, const ModelPair& models,
                       const PipelineConfig& cfg);

/// Ablation path: same candidate pipeline, but every candidate is accepted.
/// Junctions with a single bridge candidate are still joined geometrically;
/// competing candidates are left separate.
DetectionResult detect_without_verification(const GrayImage& img,
                                            const PipelineConfig& cfg);

void save_regions_json(const DetectionResult& result, int width, int height,
                       const std::string& path);

struct LoadedRegions {
  int width = 0;
  int height = 0;
  std::vector<DetectedRegion> regions;  // masks rebuilt from polygons
};

LoadedRegions load_regions_json(const std::string& path);

}  // namespace otdet

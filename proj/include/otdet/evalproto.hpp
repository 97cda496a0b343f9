#pragma once

#include <optional>
#include <string>
#include <vector>

#include "otdet/patchgeom.hpp"
#include "otdet/raster.hpp"

namespace otdet {

struct GtRegion {
  std::vector<PointXY> polygon;
  std::optional<int> char_count;
};

struct GroundTruth {
  std::vector<GtRegion> regions;
};

struct MatchParams {
  /// A detection is true iff it covers at least this fraction of some ground
  /// truth region's area.
  double min_overlap = 0.10;
  /// A true detection whose ground truth region is covered to less than
  /// 1 - miss_fraction by all detections together is also counted missing.
  double miss_fraction = 0.20;
};

struct EvalCounts {
  long tdb = 0;  // true detected blocks
  long fdb = 0;  // false detected blocks
  long mdb = 0;  // poorly covered true detections
  long atb = 0;  // actual text blocks (ground truth regions)
};

struct EvalReport {
  double recall = 0.0;
  double precision = 0.0;
  double f_measure = 0.0;
};

/// Classifies detection masks against ground truth for one image. All masks
/// must match the given dimensions.
EvalCounts match_blocks(const std::vector<BinaryMask>& detections,
                        const GroundTruth& gt, int width, int height,
                        const MatchParams& p = {});

/// recall = TDB / ATB, precision = TDB / (TDB + FDB),
/// f = 2 P R / (P + R); empty denominators give 0.
EvalReport metrics(const EvalCounts& counts);

EvalCounts& operator+=(EvalCounts& acc, const EvalCounts& other);

/// Scanline fill of a closed polygon, plus its outline. Vertices are (x, y)
/// with x the column.
BinaryMask rasterize_polygon(const std::vector<PointXY>& polygon, int width, int height);

/// Outer boundary of the largest component of the mask, suitable for
/// round-tripping through rasterize_polygon.
std::vector<PointXY> mask_boundary_polygon(const BinaryMask& mask);

/// Ground truth JSON: an array of {"polygon": [[x, y], ...]} objects, with an
/// optional "char_count" per region.
GroundTruth load_ground_truth(const std::string& path);
void save_ground_truth(const GroundTruth& gt, const std::string& path);

}  // namespace otdet

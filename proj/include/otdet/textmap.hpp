#pragma once

#include <vector>

#include "otdet/raster.hpp"

namespace otdet {

/// Per-pixel local intensity range, computed over non-overlapping 1 x N
/// horizontal windows.
struct MDMap {
  int width = 0;
  int height = 0;
  int window_length = 0;
  std::vector<double> values;  // row-major

  double at(int r, int c) const { return values[static_cast<std::size_t>(r) * width + c]; }
};

/// Window length rule: max(floor(max(width, height) / divisor), floor_px).
int md_window_length(int width, int height, int divisor = 20, int floor_px = 7);

MDMap md_map(const GrayImage& img);
MDMap md_map(const GrayImage& img, int window_length);

struct ClusterResult {
  BinaryMask mask;  // 1 where the pixel joined the higher-mean cluster
  double center_low = 0.0;
  double center_high = 0.0;
};

/// Optimal scalar 2-means over the map values. The cluster with the higher
/// mean is foreground. A map whose values are all equal yields an empty mask.
ClusterResult kmeans_2(const MDMap& map);

BinaryMask erode(const BinaryMask& mask, int se_size = 3);
BinaryMask dilate(const BinaryMask& mask, int se_size = 3);

/// Erosion followed by dilation with a square structuring element (odd size).
/// Pixels outside the mask count as background.
BinaryMask morph_open(const BinaryMask& mask, int se_size = 3);

}  // namespace otdet

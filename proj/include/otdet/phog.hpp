#pragma once

#include <string>
#include <vector>

#include "otdet/raster.hpp"

namespace otdet {

struct PhogParams {
  int window_height = 40;
  int window_width = 8;
  /// Horizontal overlap fraction between consecutive windows.
  double overlap = 0.5;
  /// Pyramid levels 0..levels, level l contributing 2^l x 2^l cells.
  int levels = 2;
  int bins = 8;
  /// L1-normalize each pyramid level separately; otherwise one global L1.
  bool per_level_norm = true;

  int stride() const;
  int descriptor_dim() const;
};

struct FeatureSequence {
  std::vector<std::vector<double>> frames;
  std::string id;
};

struct GradientMaps {
  GrayImage magnitude;
  GrayImage orientation;  // radians in [0, 2*pi)
};

/// Sobel gradients with replicated borders.
GradientMaps gradient(const GrayImage& img);

/// Pyramid histogram of oriented gradients over one window. Orientations are
/// hard-assigned to bins and weighted by magnitude. A constant window yields
/// the zero vector.
std::vector<double> phog_descriptor(const GrayImage& window, const PhogParams& p);

/// Slides the window left to right over a strip of exactly window_height rows
/// and returns one descriptor per position. The strip must fit at least one
/// window.
FeatureSequence phog_sequence(const GrayImage& strip, const PhogParams& p);

int window_count(int strip_width, const PhogParams& p);

void save_features(const FeatureSequence& seq, const std::string& path);
FeatureSequence load_features(const std::string& path);
void save_features_json(const FeatureSequence& seq, const std::string& path);
FeatureSequence load_features_json(const std::string& path);

}  // namespace otdet

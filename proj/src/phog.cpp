#include "otdet/phog.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace otdet {

int PhogParams::stride() const {
  int s = static_cast<int>(std::lround(window_width * (1.0 - overlap)));
  return std::max(s, 1);
}

int PhogParams::descriptor_dim() const {
  int d = 0;
  for (int l = 0; l <= levels; ++l) d += (1 << l) * (1 << l) * bins;
  return d;
}

GradientMaps gradient(const GrayImage& img) {
  if (img.width < 3 || img.height < 3)
    throw std::invalid_argument("gradient: image must be at least 3x3");
  GradientMaps maps{GrayImage(img.width, img.height), GrayImage(img.width, img.height)};
  auto clamped = [&](int r, int c) {
    r = std::clamp(r, 0, img.height - 1);
    c = std::clamp(c, 0, img.width - 1);
    return img.at(r, c);
  };
  for (int r = 0; r < img.height; ++r)
    for (int c = 0; c < img.width; ++c) {
      double gx = clamped(r - 1, c + 1) + 2 * clamped(r, c + 1) + clamped(r + 1, c + 1) -
                  clamped(r - 1, c - 1) - 2 * clamped(r, c - 1) - clamped(r + 1, c - 1);
      double gy = clamped(r + 1, c - 1) + 2 * clamped(r + 1, c) + clamped(r + 1, c + 1) -
                  clamped(r - 1, c - 1) - 2 * clamped(r - 1, c) - clamped(r - 1, c + 1);
      maps.magnitude.at(r, c) = std::hypot(gx, gy);
      double ori = std::atan2(gy, gx);
      if (ori < 0.0) ori += 2.0 * std::numbers::pi;
      if (ori >= 2.0 * std::numbers::pi) ori = 0.0;
      maps.orientation.at(r, c) = ori;
    }
  return maps;
}

std::vector<double> phog_descriptor(const GrayImage& window, const PhogParams& p) {
  if (window.width != p.window_width || window.height != p.window_height)
    throw std::invalid_argument("phog_descriptor: window size mismatch");
  GradientMaps maps = gradient(window);
  std::vector<double> out(static_cast<std::size_t>(p.descriptor_dim()), 0.0);
  double bin_width = 2.0 * std::numbers::pi / p.bins;

  std::size_t base = 0;
  for (int l = 0; l <= p.levels; ++l) {
    int cells = 1 << l;
    for (int r = 0; r < window.height; ++r) {
      int cr = std::min(cells - 1, r * cells / window.height);
      for (int c = 0; c < window.width; ++c) {
        int cc = std::min(cells - 1, c * cells / window.width);
        int bin = std::min(p.bins - 1,
                           static_cast<int>(maps.orientation.at(r, c) / bin_width));
        std::size_t idx = base +
                          static_cast<std::size_t>((cr * cells + cc) * p.bins + bin);
        out[idx] += maps.magnitude.at(r, c);
      }
    }
    std::size_t block = static_cast<std::size_t>(cells) * cells * p.bins;
    if (p.per_level_norm) {
      double sum = 0.0;
      for (std::size_t i = base; i < base + block; ++i) sum += out[i];
      if (sum > 0.0)
        for (std::size_t i = base; i < base + block; ++i) out[i] /= sum;
    }
    base += block;
  }
  if (!p.per_level_norm) {
    double sum = 0.0;
    for (double v : out) sum += v;
    if (sum > 0.0)
      for (double& v : out) v /= sum;
  }
  return out;
}

int window_count(int strip_width, const PhogParams& p) {
  if (strip_width < p.window_width) return 0;
  return (strip_width - p.window_width) / p.stride() + 1;
}

FeatureSequence phog_sequence(const GrayImage& strip, const PhogParams& p) {
  if (strip.height != p.window_height)
    throw std::invalid_argument("phog_sequence: strip height must equal window height");
  if (strip.width < p.window_width)
    throw std::invalid_argument("phog_sequence: strip narrower than one window");
  FeatureSequence seq;
  GrayImage window(p.window_width, p.window_height);
  for (int x = 0; x + p.window_width <= strip.width; x += p.stride()) {
    for (int r = 0; r < p.window_height; ++r)
      for (int c = 0; c < p.window_width; ++c) window.at(r, c) = strip.at(r, x + c);
    seq.frames.push_back(phog_descriptor(window, p));
  }
  return seq;
}

void save_features(const FeatureSequence& seq, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open file for writing: " + path);
  std::uint32_t count = static_cast<std::uint32_t>(seq.frames.size());
  std::uint32_t dim = count ? static_cast<std::uint32_t>(seq.frames[0].size()) : 0;
  f.write(reinterpret_cast<const char*>(&count), 4);
  f.write(reinterpret_cast<const char*>(&dim), 4);
  for (const auto& frame : seq.frames) {
    if (frame.size() != dim) throw std::invalid_argument("save_features: ragged frames");
    f.write(reinterpret_cast<const char*>(frame.data()),
            static_cast<std::streamsize>(frame.size() * sizeof(double)));
  }
  if (!f) throw IoError("feature write failed: " + path);
}

FeatureSequence load_features(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open file: " + path);
  std::uint32_t count = 0, dim = 0;
  f.read(reinterpret_cast<char*>(&count), 4);
  f.read(reinterpret_cast<char*>(&dim), 4);
  if (!f) throw FormatError("truncated feature file: " + path);
  FeatureSequence seq;
  seq.id = std::filesystem::path(path).stem().string();
  seq.frames.assign(count, std::vector<double>(dim, 0.0));
  for (auto& frame : seq.frames) {
    f.read(reinterpret_cast<char*>(frame.data()),
           static_cast<std::streamsize>(dim * sizeof(double)));
    if (!f) throw FormatError("truncated feature file: " + path);
  }
  return seq;
}

void save_features_json(const FeatureSequence& seq, const std::string& path) {
  nlohmann::json j;
  j["id"] = seq.id;
  j["frames"] = seq.frames;
  std::ofstream f(path);
  if (!f) throw IoError("cannot open file for writing: " + path);
  f << j.dump(2) << "\n";
}

FeatureSequence load_features_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open file: " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad feature JSON: ") + e.what());
  }
  FeatureSequence seq;
  seq.id = j.value("id", "");
  seq.frames = j.at("frames").get<std::vector<std::vector<double>>>();
  return seq;
}

}  // namespace otdet

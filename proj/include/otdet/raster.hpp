#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace otdet {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Pixel coordinate, (row, col). Ordering is row-major.
struct Pixel {
  int row = 0;
  int col = 0;
  auto operator<=>(const Pixel&) const = default;
};

struct PixelHash {
  std::size_t operator()(const Pixel& p) const {
    return std::hash<long long>()((static_cast<long long>(p.row) << 32) ^
                                  static_cast<std::uint32_t>(p.col));
  }
};

/// 2-D intensity raster. Values are kept as reals so the filter chain does
/// not quantize; nominal display range is [0, 255].
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> data;  // row-major

  GrayImage() = default;
  GrayImage(int w, int h, double fill = 0.0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {
    if (w < 1 || h < 1) throw std::invalid_argument("GrayImage: dimensions must be >= 1");
  }
  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * width + c]; }
  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * width + c]; }
  bool in_bounds(int r, int c) const { return r >= 0 && r < height && c >= 0 && c < width; }
};

struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;  // row-major, 0/1

  BinaryMask() = default;
  BinaryMask(int w, int h, bool fill = false)
      : width(w), height(h), bits(static_cast<std::size_t>(w) * h, fill ? 1 : 0) {
    if (w < 1 || h < 1) throw std::invalid_argument("BinaryMask: dimensions must be >= 1");
  }
  bool at(int r, int c) const { return bits[static_cast<std::size_t>(r) * width + c] != 0; }
  void set(int r, int c, bool v) { bits[static_cast<std::size_t>(r) * width + c] = v ? 1 : 0; }
  bool in_bounds(int r, int c) const { return r >= 0 && r < height && c >= 0 && c < width; }
  std::size_t count() const;
};

/// 8-connected component of foreground pixels.
struct Component {
  int id = 0;
  std::vector<Pixel> pixels;  // row-major order
  int min_row = 0, max_row = 0, min_col = 0, max_col = 0;
};

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // row-major, 3 bytes per pixel

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, 0) {}
  void set(int r, int c, std::uint8_t red, std::uint8_t green, std::uint8_t blue) {
    std::size_t i = (static_cast<std::size_t>(r) * width + c) * 3;
    rgb[i] = red;
    rgb[i + 1] = green;
    rgb[i + 2] = blue;
  }
};

/// Rec. 601 luma, rounded to the nearest integer level.
double luma(double r, double g, double b);

/// Loads a PNG or binary PGM (P5) image as grayscale. Color inputs are
/// converted by luma weighting.
GrayImage load_gray(const std::string& path);

void save_pgm(const GrayImage& img, const std::string& path);
void save_png_gray(const GrayImage& img, const std::string& path);
void save_png_rgb(const RgbImage& img, const std::string& path);

RgbImage to_rgb(const GrayImage& img);

/// Bilinear resample to the given size.
GrayImage resize_bilinear(const GrayImage& img, int new_width, int new_height);

/// Labels 8-connected foreground components. Components are ordered by their
/// first foreground pixel in a row-major scan; pixel lists are row-major.
std::vector<Component> connected_components(const BinaryMask& mask);

}  // namespace otdet

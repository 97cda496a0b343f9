#pragma once

#include <array>
#include <vector>

#include "otdet/raster.hpp"
#include "otdet/skeleton.hpp"

namespace otdet {

struct PointXY {
  double x = 0.0;
  double y = 0.0;
};

double euclidean(const PointXY& a, const PointXY& b);
double euclidean(const Pixel& a, const Pixel& b);

enum class SymmetryMode {
  /// As printed: |d_a - d_b| / max(d_a, d_b) < 0.05 * max(d_a, d_b) and
  /// |(d_a + d_b) - d_ab| / max(d_a + d_b, d_ab) < 0.05 * max(d_a + d_b, d_ab).
  /// The bounds scale with magnitude, so the test loosens for long branches.
  Scaled,
  /// Plain 5% relative comparison on both clauses.
  Relative,
};

/// Whether branch endpoints a and b, at branch lengths d_a and d_b from
/// their junction and separated by d_ab, count as symmetric.
bool is_symmetric(double d_a, double d_b, double d_ab,
                  SymmetryMode mode = SymmetryMode::Scaled);

struct SymmetricPair {
  Pixel a, b;         // branch endpoints
  double d_a = 0.0;   // endpoint-to-junction Euclidean distances
  double d_b = 0.0;
  double d_ab = 0.0;  // endpoint-to-endpoint distance
};

enum class WidthSource { SymmetricMax, DoubledLoneBranch, ThirdOfLength };

struct WidthEstimate {
  double width = 0.0;
  WidthSource source = WidthSource::ThirdOfLength;
  std::vector<SymmetricPair> pairs;  // the symmetric pairs that competed
};

/// Stroke width from branch geometry. Terminal branches (junction to
/// endpoint) are paired within each junction region, where a region is a
/// connected set of junction pixels; symmetric pairs bid their d_ab,
/// unpaired branches bid twice their own length, and the maximum bid wins.
/// A skeleton with no terminal branches falls back to length / 3.
WidthEstimate compute_width(const SkeletonGraph& sk,
                            SymmetryMode mode = SymmetryMode::Scaled);

/// Dilates the skeleton with a digital disk of radius width / 2
/// (dr^2 + dc^2 <= (width / 2)^2), clipped to the image.
BinaryMask thicken(const SkeletonGraph& sk, double width, int image_width,
                   int image_height);

/// Copies intensities under the mask into a bounding-box crop; background is
/// 0. Empty mask is an error.
GrayImage extract_region(const GrayImage& img, const BinaryMask& mask);

/// Least-squares fit of y = sum c_k x^k. The effective degree is
/// min(degree, distinct x count - 1). Fewer than 2 points is an error.
std::array<double, 5> fit_polynomial(const std::vector<PointXY>& pts, int degree = 4);

/// Rotation between image coordinates (x = col, y = row) and the fitting
/// frame in which the main-axis chord is horizontal.
struct PatchFrame {
  double angle = 0.0;  // chord angle, atan2(delta_row, delta_col)
  double pivot_x = 0.0;
  double pivot_y = 0.0;
  PointXY to_frame(const PointXY& image_pt) const;
  PointXY to_image(const PointXY& frame_pt) const;
};

struct PolynomialCurve {
  std::array<double, 5> coeff{};  // c_0 .. c_4
  double x_min = 0.0;
  double x_max = 0.0;
  /// Mean vertical extent of the patch in the fitting frame.
  double mean_height = 0.0;
  double eval(double x) const;
  double slope(double x) const;
};

/// A candidate region: thickened mask, cropped gray strip, and centerline
/// geometry, all derived from one skeleton.
struct TextPatch {
  BinaryMask mask;         // full-image thickened mask
  GrayImage gray;          // bounding-box crop of the masked image, background 0
  int origin_row = 0;      // crop offset of gray within the image
  int origin_col = 0;
  SkeletonGraph skeleton;  // image coordinates
  WidthEstimate width;
  PatchFrame frame;
  PolynomialCurve curve;   // in the fitting frame
};

TextPatch make_patch(const GrayImage& img, const SkeletonGraph& sk,
                     SymmetryMode mode = SymmetryMode::Scaled);

/// Straightens the patch: walks the fitted curve by arc length; each output
/// column samples the patch bilinearly along the curve normal, spanning the
/// patch's mean height. Output is target_height rows by round(arc length)
/// columns; samples outside the patch read 0. Zero-span curve is an error.
GrayImage rectify(const TextPatch& patch, int target_height = 40);

}  // namespace otdet

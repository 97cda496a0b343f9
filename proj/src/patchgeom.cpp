#include "otdet/patchgeom.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <unordered_set>

namespace otdet {

double euclidean(const PointXY& a, const PointXY& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

double euclidean(const Pixel& a, const Pixel& b) {
  return std::hypot(static_cast<double>(a.row - b.row),
                    static_cast<double>(a.col - b.col));
}

bool is_symmetric(double d_a, double d_b, double d_ab, SymmetryMode mode) {
  if (!(d_a > 0.0) || !(d_b > 0.0))
    throw std::invalid_argument("is_symmetric: branch lengths must be > 0");
  double m1 = std::max(d_a, d_b);
  double sum = d_a + d_b;
  double m2 = std::max(sum, d_ab);
  double bound1 = mode == SymmetryMode::Scaled ? 0.05 * m1 : 0.05;
  double bound2 = mode == SymmetryMode::Scaled ? 0.05 * m2 : 0.05;
  return std::abs(d_a - d_b) / m1 < bound1 && std::abs(sum - d_ab) / m2 < bound2;
}

WidthEstimate compute_width(const SkeletonGraph& sk, SymmetryMode mode) {
  // Adjacent junction pixels act as one junction region; terminal branches
  // attached to the same region are pairing partners.
  std::unordered_map<Pixel, int, PixelHash> region;
  {
    std::unordered_set<Pixel, PixelHash> junc_set(sk.junctions.begin(), sk.junctions.end());
    int next = 0;
    for (const Pixel& j : sk.junctions) {
      if (region.count(j)) continue;
      std::vector<Pixel> stack{j};
      region[j] = next;
      while (!stack.empty()) {
        Pixel p = stack.back();
        stack.pop_back();
        for (int dr = -1; dr <= 1; ++dr)
          for (int dc = -1; dc <= 1; ++dc) {
            Pixel q{p.row + dr, p.col + dc};
            if ((dr || dc) && junc_set.count(q) && !region.count(q)) {
              region[q] = next;
              stack.push_back(q);
            }
          }
      }
      ++next;
    }
  }

  // Terminal branches: node paths running from a junction to an endpoint.
  struct Terminal {
    Pixel junction, endpoint;
    double d;
  };
  std::unordered_set<Pixel, PixelHash> eps(sk.endpoints.begin(), sk.endpoints.end());
  std::vector<Terminal> terms;
  for (const auto& br : sk.branches) {
    if (br.size() < 2) continue;
    const Pixel& u = br.front();
    const Pixel& v = br.back();
    if (region.count(u) && eps.count(v))
      terms.push_back({u, v, euclidean(u, v)});
    else if (region.count(v) && eps.count(u))
      terms.push_back({v, u, euclidean(v, u)});
  }

  WidthEstimate est;
  std::vector<bool> paired(terms.size(), false);
  double best_pair = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i)
    for (std::size_t j = i + 1; j < terms.size(); ++j) {
      if (region[terms[i].junction] != region[terms[j].junction]) continue;
      double d_ab = euclidean(terms[i].endpoint, terms[j].endpoint);
      if (!is_symmetric(terms[i].d, terms[j].d, d_ab, mode)) continue;
      est.pairs.push_back({terms[i].endpoint, terms[j].endpoint, terms[i].d, terms[j].d, d_ab});
      paired[i] = paired[j] = true;
      best_pair = std::max(best_pair, d_ab);
    }
  double best_lone = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i)
    if (!paired[i]) best_lone = std::max(best_lone, 2.0 * terms[i].d);

  if (terms.empty()) {
    est.width = std::max(sk.length / 3.0, 1.0);
    est.source = WidthSource::ThirdOfLength;
  } else if (best_pair >= best_lone && !est.pairs.empty()) {
    est.width = best_pair;
    est.source = WidthSource::SymmetricMax;
  } else {
    est.width = best_lone;
    est.source = WidthSource::DoubledLoneBranch;
  }
  return est;
}

BinaryMask thicken(const SkeletonGraph& sk, double width, int image_width,
                   int image_height) {
  if (width < 1.0) throw std::invalid_argument("thicken: width must be >= 1");
  double radius = width / 2.0;
  double r2 = radius * radius;
  int reach = static_cast<int>(std::floor(radius));
  std::vector<std::pair<int, int>> disk;
  for (int dr = -reach; dr <= reach; ++dr)
    for (int dc = -reach; dc <= reach; ++dc)
      if (dr * dr + dc * dc <= r2) disk.emplace_back(dr, dc);

  BinaryMask out(image_width, image_height, false);
  for (const Pixel& p : sk.pixels)
    for (auto [dr, dc] : disk) {
      int r = p.row + dr, c = p.col + dc;
      if (out.in_bounds(r, c)) out.set(r, c, true);
    }
  return out;
}

namespace {

struct Bounds {
  int min_row, max_row, min_col, max_col;
};

Bounds mask_bounds(const BinaryMask& mask) {
  Bounds b{mask.height, -1, mask.width, -1};
  for (int r = 0; r < mask.height; ++r)
    for (int c = 0; c < mask.width; ++c)
      if (mask.at(r, c)) {
        b.min_row = std::min(b.min_row, r);
        b.max_row = std::max(b.max_row, r);
        b.min_col = std::min(b.min_col, c);
        b.max_col = std::max(b.max_col, c);
      }
  if (b.max_row < 0) throw std::invalid_argument("empty mask");
  return b;
}

double bilinear(const GrayImage& img, double r, double c) {
  int r0 = static_cast<int>(std::floor(r));
  int c0 = static_cast<int>(std::floor(c));
  double fr = r - r0, fc = c - c0;
  auto tap = [&](int rr, int cc) {
    return img.in_bounds(rr, cc) ? img.at(rr, cc) : 0.0;
  };
  return tap(r0, c0) * (1 - fr) * (1 - fc) + tap(r0, c0 + 1) * (1 - fr) * fc +
         tap(r0 + 1, c0) * fr * (1 - fc) + tap(r0 + 1, c0 + 1) * fr * fc;
}

}  // namespace

GrayImage extract_region(const GrayImage& img, const BinaryMask& mask) {
  if (img.width != mask.width || img.height != mask.height)
    throw std::invalid_argument("extract_region: mask and image dimensions differ");
  Bounds b = mask_bounds(mask);
  GrayImage out(b.max_col - b.min_col + 1, b.max_row - b.min_row + 1, 0.0);
  for (int r = b.min_row; r <= b.max_row; ++r)
    for (int c = b.min_col; c <= b.max_col; ++c)
      if (mask.at(r, c)) out.at(r - b.min_row, c - b.min_col) = img.at(r, c);
  return out;
}

std::array<double, 5> fit_polynomial(const std::vector<PointXY>& pts, int degree) {
  if (degree < 0 || degree > 4)
    throw std::invalid_argument("fit_polynomial: degree must be in [0, 4]");
  if (pts.size() < 2) throw std::invalid_argument("fit_polynomial: need at least 2 points");
  std::vector<double> xs;
  xs.reserve(pts.size());
  for (const auto& p : pts) xs.push_back(p.x);
  std::sort(xs.begin(), xs.end());
  int distinct = static_cast<int>(std::unique(xs.begin(), xs.end()) - xs.begin());
  int eff = std::min(degree, distinct - 1);
  if (eff < 0) eff = 0;

  Eigen::MatrixXd a(pts.size(), eff + 1);
  Eigen::VectorXd y(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double v = 1.0;
    for (int k = 0; k <= eff; ++k) {
      a(static_cast<Eigen::Index>(i), k) = v;
      v *= pts[i].x;
    }
    y(static_cast<Eigen::Index>(i)) = pts[i].y;
  }
  Eigen::VectorXd c = a.householderQr().solve(y);
  std::array<double, 5> out{};
  for (int k = 0; k <= eff; ++k) out[static_cast<std::size_t>(k)] = c(k);
  return out;
}

PointXY PatchFrame::to_frame(const PointXY& image_pt) const {
  double dx = image_pt.x - pivot_x, dy = image_pt.y - pivot_y;
  double ca = std::cos(angle), sa = std::sin(angle);
  return {ca * dx + sa * dy, -sa * dx + ca * dy};
}

PointXY PatchFrame::to_image(const PointXY& frame_pt) const {
  double ca = std::cos(angle), sa = std::sin(angle);
  return {pivot_x + ca * frame_pt.x - sa * frame_pt.y,
          pivot_y + sa * frame_pt.x + ca * frame_pt.y};
}

double PolynomialCurve::eval(double x) const {
  double v = 0.0;
  for (int k = 4; k >= 0; --k) v = v * x + coeff[static_cast<std::size_t>(k)];
  return v;
}

double PolynomialCurve::slope(double x) const {
  double v = 0.0;
  for (int k = 4; k >= 1; --k) v = v * x + k * coeff[static_cast<std::size_t>(k)];
  return v;
}

TextPatch make_patch(const GrayImage& img, const SkeletonGraph& sk, SymmetryMode mode) {
  TextPatch patch;
  patch.skeleton = sk;
  patch.width = compute_width(sk, mode);
  patch.mask = thicken(sk, std::max(patch.width.width, 1.0), img.width, img.height);
  Bounds b = mask_bounds(patch.mask);
  patch.origin_row = b.min_row;
  patch.origin_col = b.min_col;
  patch.gray = extract_region(img, patch.mask);

  const Pixel& start = sk.main_axis.front();
  const Pixel& stop = sk.main_axis.back();
  patch.frame.angle = std::atan2(static_cast<double>(stop.row - start.row),
                                 static_cast<double>(stop.col - start.col));
  patch.frame.pivot_x = start.col;
  patch.frame.pivot_y = start.row;

  std::vector<PointXY> pts;
  pts.reserve(sk.pixels.size());
  double x_min = 0.0, x_max = 0.0;
  bool first = true;
  for (const Pixel& p : sk.pixels) {
    PointXY f = patch.frame.to_frame({static_cast<double>(p.col), static_cast<double>(p.row)});
    pts.push_back(f);
    x_min = first ? f.x : std::min(x_min, f.x);
    x_max = first ? f.x : std::max(x_max, f.x);
    first = false;
  }
  patch.curve.coeff = pts.size() >= 2 ? fit_polynomial(pts, 4) : std::array<double, 5>{};
  patch.curve.x_min = x_min;
  patch.curve.x_max = x_max;

  // Mean vertical extent of the mask per unit column of the fitting frame.
  std::map<long, std::pair<double, double>> columns;  // x bin -> (min_y, max_y)
  for (int r = 0; r < patch.mask.height; ++r)
    for (int c = 0; c < patch.mask.width; ++c) {
      if (!patch.mask.at(r, c)) continue;
      PointXY f = patch.frame.to_frame({static_cast<double>(c), static_cast<double>(r)});
      long bin = std::lround(f.x);
      auto it = columns.find(bin);
      if (it == columns.end())
        columns[bin] = {f.y, f.y};
      else {
        it->second.first = std::min(it->second.first, f.y);
        it->second.second = std::max(it->second.second, f.y);
      }
    }
  double acc = 0.0;
  for (const auto& [bin, mm] : columns) acc += mm.second - mm.first + 1.0;
  patch.curve.mean_height = columns.empty() ? 1.0 : acc / static_cast<double>(columns.size());
  return patch;
}

GrayImage rectify(const TextPatch& patch, int target_height) {
  if (target_height < 1) throw std::invalid_argument("rectify: target height must be >= 1");
  const PolynomialCurve& curve = patch.curve;
  double span = curve.x_max - curve.x_min;
  if (!(span > 0.0)) throw std::invalid_argument("rectify: degenerate curve span");

  // Cumulative arc length, four samples per unit x.
  int steps = std::max(8, static_cast<int>(std::ceil(span * 4.0)));
  std::vector<double> arc(static_cast<std::size_t>(steps) + 1, 0.0);
  std::vector<double> xs(static_cast<std::size_t>(steps) + 1, 0.0);
  double prev_y = curve.eval(curve.x_min);
  xs[0] = curve.x_min;
  for (int i = 1; i <= steps; ++i) {
    double x = curve.x_min + span * i / steps;
    double y = curve.eval(x);
    xs[static_cast<std::size_t>(i)] = x;
    arc[static_cast<std::size_t>(i)] = arc[static_cast<std::size_t>(i) - 1] +
                                       std::hypot(span / steps, y - prev_y);
    prev_y = y;
  }
  double total = arc.back();
  int out_width = std::max(1, static_cast<int>(std::lround(total)));
  double height = std::max(curve.mean_height, 1.0);

  GrayImage out(out_width, target_height, 0.0);
  for (int j = 0; j < out_width; ++j) {
    double s = (j + 0.5) * total / out_width;
    auto it = std::lower_bound(arc.begin(), arc.end(), s);
    std::size_t hi = std::min<std::size_t>(arc.size() - 1,
                                           static_cast<std::size_t>(it - arc.begin()));
    if (hi == 0) hi = 1;
    double t = (s - arc[hi - 1]) / std::max(arc[hi] - arc[hi - 1], 1e-12);
    double x = xs[hi - 1] + (xs[hi] - xs[hi - 1]) * t;
    double y = curve.eval(x);
    double m = curve.slope(x);
    double inv = 1.0 / std::sqrt(1.0 + m * m);
    double nx = -m * inv, ny = inv;  // normal, positive toward larger frame y
    for (int r = 0; r < target_height; ++r) {
      double off = ((r + 0.5) / target_height - 0.5) * height;
      PointXY ip = patch.frame.to_image({x + nx * off, y + ny * off});
      out.at(r, j) = bilinear(patch.gray, ip.y - patch.origin_row, ip.x - patch.origin_col);
    }
  }
  return out;
}

}  // namespace otdet

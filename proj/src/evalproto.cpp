#include "otdet/evalproto.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "otdet/skeleton.hpp"

namespace otdet {

namespace {

std::size_t overlap_count(const BinaryMask& a, const BinaryMask& b) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.bits.size(); ++i) n += a.bits[i] & b.bits[i];
  return n;
}

}  // namespace

BinaryMask rasterize_polygon(const std::vector<PointXY>& polygon, int width, int height) {
  BinaryMask mask(width, height);
  if (polygon.empty()) return mask;
  std::size_t n = polygon.size();
  if (n == 1) {
    int r = static_cast<int>(std::lround(polygon[0].y));
    int c = static_cast<int>(std::lround(polygon[0].x));
    if (mask.in_bounds(r, c)) mask.set(r, c, true);
    return mask;
  }

  // Even-odd scanline fill sampled at pixel centers (x = col, y = row).
  std::vector<double> crossings;
  for (int r = 0; r < height; ++r) {
    double y = r;
    crossings.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const PointXY& a = polygon[i];
      const PointXY& b = polygon[(i + 1) % n];
      if ((a.y <= y && y < b.y) || (b.y <= y && y < a.y))
        crossings.push_back(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
    }
    std::sort(crossings.begin(), crossings.end());
    for (std::size_t i = 0; i + 1 < crossings.size(); i += 2) {
      int c0 = std::max(0, static_cast<int>(std::ceil(crossings[i])));
      int c1 = std::min(width - 1, static_cast<int>(std::floor(crossings[i + 1])));
      for (int c = c0; c <= c1; ++c) mask.set(r, c, true);
    }
  }

  // The outline itself always belongs to the region.
  for (std::size_t i = 0; i < n; ++i) {
    const PointXY& a = polygon[i];
    const PointXY& b = polygon[(i + 1) % n];
    Pixel pa{static_cast<int>(std::lround(a.y)), static_cast<int>(std::lround(a.x))};
    Pixel pb{static_cast<int>(std::lround(b.y)), static_cast<int>(std::lround(b.x))};
    for (const Pixel& p : bresenham_line(pa, pb))
      if (mask.in_bounds(p.row, p.col)) mask.set(p.row, p.col, true);
  }
  return mask;
}

std::vector<PointXY> mask_boundary_polygon(const BinaryMask& mask) {
  std::vector<Component> comps = connected_components(mask);
  if (comps.empty()) return {};
  const Component* largest = &comps[0];
  for (const Component& c : comps)
    if (c.pixels.size() > largest->pixels.size()) largest = &c;

  BinaryMask grid(mask.width, mask.height);
  for (const Pixel& p : largest->pixels) grid.set(p.row, p.col, true);
  Pixel start = largest->pixels.front();  // row-major first: west neighbor is clear

  // Moore neighbors, clockwise on screen starting west.
  static const int kDr[8] = {0, -1, -1, -1, 0, 1, 1, 1};
  static const int kDc[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
  auto dir_of = [&](const Pixel& from, const Pixel& to) {
    for (int d = 0; d < 8; ++d)
      if (from.row + kDr[d] == to.row && from.col + kDc[d] == to.col) return d;
    return 0;
  };

  std::vector<PointXY> boundary;
  boundary.push_back({static_cast<double>(start.col), static_cast<double>(start.row)});
  Pixel p = start;
  Pixel back{start.row, start.col - 1};
  const Pixel back0 = back;
  std::size_t guard = 4 * largest->pixels.size() + 8;
  for (std::size_t step = 0; step < guard; ++step) {
    int from = dir_of(p, back);
    Pixel next = p, next_back = back;
    bool found = false;
    for (int k = 1; k <= 8; ++k) {
      int d = (from + k) % 8;
      Pixel q{p.row + kDr[d], p.col + kDc[d]};
      if (grid.in_bounds(q.row, q.col) && grid.at(q.row, q.col)) {
        next = q;
        int prev = (from + k - 1) % 8;
        next_back = {p.row + kDr[prev], p.col + kDc[prev]};
        found = true;
        break;
      }
    }
    if (!found) break;  // isolated pixel
    p = next;
    back = next_back;
    if (p == start && back == back0) break;  // closed the loop
    boundary.push_back({static_cast<double>(p.col), static_cast<double>(p.row)});
  }
  return boundary;
}

EvalCounts match_blocks(const std::vector<BinaryMask>& detections,
                        const GroundTruth& gt, int width, int height,
                        const MatchParams& p) {
  for (const auto& d : detections)
    if (d.width != width || d.height != height)
      throw std::invalid_argument("match_blocks: detection mask size mismatch");

  EvalCounts counts;
  counts.atb = static_cast<long>(gt.regions.size());

  std::vector<BinaryMask> gt_masks;
  std::vector<std::size_t> gt_area;
  gt_masks.reserve(gt.regions.size());
  for (const auto& region : gt.regions) {
    gt_masks.push_back(rasterize_polygon(region.polygon, width, height));
    gt_area.push_back(gt_masks.back().count());
  }

  // Union of every detection, for ground-truth coverage.
  BinaryMask all_detected(std::max(width, 1), std::max(height, 1));
  if (!detections.empty()) {
    all_detected = detections[0];
    for (std::size_t i = 1; i < detections.size(); ++i)
      for (std::size_t b = 0; b < all_detected.bits.size(); ++b)
        all_detected.bits[b] |= detections[i].bits[b];
  }

  // A ground truth region is poorly covered when the union of detections
  // misses more than miss_fraction of it (area, or characters when given).
  std::vector<bool> poorly_covered(gt.regions.size(), false);
  for (std::size_t g = 0; g < gt.regions.size(); ++g) {
    if (gt_area[g] == 0) continue;
    double coverage = detections.empty()
                          ? 0.0
                          : static_cast<double>(overlap_count(all_detected, gt_masks[g])) /
                                static_cast<double>(gt_area[g]);
    if (gt.regions[g].char_count) {
      int chars = *gt.regions[g].char_count;
      long missed = std::lround((1.0 - coverage) * chars);
      poorly_covered[g] = missed > p.miss_fraction * chars;
    } else {
      poorly_covered[g] = coverage < 1.0 - p.miss_fraction;
    }
  }

  for (const auto& det : detections) {
    std::size_t best_overlap = 0;
    std::size_t best_gt = gt.regions.size();
    for (std::size_t g = 0; g < gt.regions.size(); ++g) {
      if (gt_area[g] == 0) continue;
      std::size_t ov = overlap_count(det, gt_masks[g]);
      if (static_cast<double>(ov) >= p.min_overlap * static_cast<double>(gt_area[g]) &&
          ov > best_overlap) {
        best_overlap = ov;
        best_gt = g;
      }
    }
    if (best_gt == gt.regions.size()) {
      ++counts.fdb;
    } else {
      ++counts.tdb;
      if (poorly_covered[best_gt]) ++counts.mdb;
    }
  }
  return counts;
}

EvalReport metrics(const EvalCounts& counts) {
  EvalReport rep;
  if (counts.atb > 0) rep.recall = static_cast<double>(counts.tdb) / counts.atb;
  long det = counts.tdb + counts.fdb;
  if (det > 0) rep.precision = static_cast<double>(counts.tdb) / det;
  if (rep.recall + rep.precision > 0.0)
    rep.f_measure = 2.0 * rep.precision * rep.recall / (rep.precision + rep.recall);
  return rep;
}

EvalCounts& operator+=(EvalCounts& acc, const EvalCounts& other) {
  acc.tdb += other.tdb;
  acc.fdb += other.fdb;
  acc.mdb += other.mdb;
  acc.atb += other.atb;
  return acc;
}

GroundTruth load_ground_truth(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open file: " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad ground truth JSON: ") + e.what());
  }
  if (!j.is_array()) throw FormatError("ground truth must be a JSON array: " + path);
  GroundTruth gt;
  for (const auto& entry : j) {
    GtRegion region;
    for (const auto& pt : entry.at("polygon")) {
      if (!pt.is_array() || pt.size() != 2)
        throw FormatError("polygon points must be [x, y] pairs: " + path);
      region.polygon.push_back({pt[0].get<double>(), pt[1].get<double>()});
    }
    if (entry.contains("char_count")) region.char_count = entry["char_count"].get<int>();
    gt.regions.push_back(std::move(region));
  }
  return gt;
}

void save_ground_truth(const GroundTruth& gt, const std::string& path) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& region : gt.regions) {
    nlohmann::json entry;
    entry["polygon"] = nlohmann::json::array();
    for (const auto& pt : region.polygon) entry["polygon"].push_back({pt.x, pt.y});
    if (region.char_count) entry["char_count"] = *region.char_count;
    j.push_back(std::move(entry));
  }
  std::ofstream f(path);
  if (!f) throw IoError("cannot open file for writing: " + path);
  f << j.dump(2) << "\n";
}

}  // namespace otdet

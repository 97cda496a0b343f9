#include "otdet/textmap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace otdet {

int md_window_length(int width, int height, int divisor, int floor_px) {
  if (width < 1 || height < 1) throw std::invalid_argument("md_window_length: empty image");
  if (divisor < 1 || floor_px < 1)
    throw std::invalid_argument("md_window_length: divisor and floor must be >= 1");
  return std::max(std::max(width, height) / divisor, floor_px);
}

MDMap md_map(const GrayImage& img) {
  return md_map(img, md_window_length(img.width, img.height));
}

MDMap md_map(const GrayImage& img, int window_length) {
  if (window_length < 1) throw std::invalid_argument("md_map: window length must be >= 1");
  MDMap map;
  map.width = img.width;
  map.height = img.height;
  map.window_length = window_length;
  map.values.resize(img.data.size());
  for (int r = 0; r < img.height; ++r) {
    for (int c0 = 0; c0 < img.width; c0 += window_length) {
      int c1 = std::min(c0 + window_length, img.width);  // trailing window shrinks
      double lo = img.at(r, c0), hi = lo;
      for (int c = c0 + 1; c < c1; ++c) {
        lo = std::min(lo, img.at(r, c));
        hi = std::max(hi, img.at(r, c));
      }
      double range = hi - lo;
      for (int c = c0; c < c1; ++c)
        map.values[static_cast<std::size_t>(r) * map.width + c] = range;
    }
  }
  return map;
}

ClusterResult kmeans_2(const MDMap& map) {
  if (map.values.empty()) throw std::invalid_argument("kmeans_2: empty map");
  std::vector<double> sorted = map.values;
  std::sort(sorted.begin(), sorted.end());
  std::size_t n = sorted.size();

  ClusterResult res;
  res.mask = BinaryMask(map.width, map.height, false);
  if (sorted.front() == sorted.back()) {
    // Degenerate map; nothing stands out, so nothing is foreground.
    res.center_low = res.center_high = sorted.front();
    return res;
  }

  // With one scalar dimension the optimal 2-partition is a threshold on the
  // sorted values, so minimizing within-cluster sum of squares reduces to
  // scanning every split between distinct neighbors using prefix sums.
  std::vector<double> prefix(n + 1, 0.0), prefix_sq(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    prefix[i + 1] = prefix[i] + sorted[i];
    prefix_sq[i + 1] = prefix_sq[i] + sorted[i] * sorted[i];
  }
  auto wcss = [&](std::size_t lo, std::size_t hi) {  // half-open [lo, hi)
    double cnt = static_cast<double>(hi - lo);
    double sum = prefix[hi] - prefix[lo];
    return (prefix_sq[hi] - prefix_sq[lo]) - sum * sum / cnt;
  };
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_split = 1;
  for (std::size_t k = 1; k < n; ++k) {
    if (sorted[k] == sorted[k - 1]) continue;
    double cost = wcss(0, k) + wcss(k, n);
    if (cost < best) {
      best = cost;
      best_split = k;
    }
  }
  res.center_low = prefix[best_split] / static_cast<double>(best_split);
  res.center_high =
      (prefix[n] - prefix[best_split]) / static_cast<double>(n - best_split);
  double threshold = sorted[best_split];  // smallest value of the high cluster
  for (std::size_t i = 0; i < map.values.size(); ++i)
    res.mask.bits[i] = map.values[i] >= threshold ? 1 : 0;
  return res;
}

namespace {

BinaryMask morph(const BinaryMask& mask, int se_size, bool erosion) {
  if (se_size < 1 || se_size % 2 == 0)
    throw std::invalid_argument("morph: structuring element size must be odd and >= 1");
  int h = se_size / 2;
  BinaryMask out(mask.width, mask.height, false);
  for (int r = 0; r < mask.height; ++r)
    for (int c = 0; c < mask.width; ++c) {
      bool hit = erosion;
      for (int dr = -h; dr <= h && hit == erosion; ++dr)
        for (int dc = -h; dc <= h; ++dc) {
          int nr = r + dr, nc = c + dc;
          // Outside the mask counts as background.
          bool v = mask.in_bounds(nr, nc) && mask.at(nr, nc);
          if (erosion && !v) {
            hit = false;
            break;
          }
          if (!erosion && v) {
            hit = true;
            break;
          }
        }
      out.set(r, c, hit);
    }
  return out;
}

}  // namespace

BinaryMask erode(const BinaryMask& mask, int se_size) { return morph(mask, se_size, true); }

BinaryMask dilate(const BinaryMask& mask, int se_size) { return morph(mask, se_size, false); }

BinaryMask morph_open(const BinaryMask& mask, int se_size) {
  return dilate(erode(mask, se_size), se_size);
}

}  // namespace otdet

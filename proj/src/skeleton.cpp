#include "otdet/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace otdet {

namespace {

using PixelSet = std::unordered_set<Pixel, PixelHash>;

// Neighbors inside the set, in row-major order.
std::vector<Pixel> neighbors_in(const Pixel& p, const PixelSet& set) {
  std::vector<Pixel> out;
  for (int dr = -1; dr <= 1; ++dr)
    for (int dc = -1; dc <= 1; ++dc) {
      if (dr == 0 && dc == 0) continue;
      Pixel q{p.row + dr, p.col + dc};
      if (set.count(q)) out.push_back(q);
    }
  return out;
}

struct BfsResult {
  std::unordered_map<Pixel, int, PixelHash> dist;
  std::unordered_map<Pixel, Pixel, PixelHash> parent;
};

BfsResult bfs(const Pixel& start, const PixelSet& set) {
  BfsResult res;
  std::deque<Pixel> queue{start};
  res.dist[start] = 0;
  while (!queue.empty()) {
    Pixel p = queue.front();
    queue.pop_front();
    int d = res.dist[p];
    for (const Pixel& q : neighbors_in(p, set)) {
      if (res.dist.count(q)) continue;
      res.dist[q] = d + 1;
      res.parent[q] = p;
      queue.push_back(q);
    }
  }
  return res;
}

std::vector<Pixel> path_to(const BfsResult& res, Pixel target) {
  std::vector<Pixel> path{target};
  auto it = res.parent.find(target);
  while (it != res.parent.end()) {
    path.push_back(it->second);
    it = res.parent.find(it->second);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

// Walks a pure cycle starting at its smallest pixel; every pixel has exactly
// two in-set neighbors.
std::vector<Pixel> walk_cycle(const std::vector<Pixel>& sorted, const PixelSet& set) {
  Pixel start = sorted.front();
  std::vector<Pixel> path{start};
  Pixel prev = start;
  Pixel cur = neighbors_in(start, set).front();
  while (!(cur == start)) {
    path.push_back(cur);
    auto nbrs = neighbors_in(cur, set);
    Pixel next = nbrs.front() == prev ? nbrs.back() : nbrs.front();
    prev = cur;
    cur = next;
  }
  return path;
}

double endpoint_distance(const Pixel& a, const Pixel& b) {
  return std::hypot(static_cast<double>(a.row - b.row),
                    static_cast<double>(a.col - b.col));
}

std::vector<std::vector<Pixel>> decompose_branches(const std::vector<Pixel>& sorted,
                                                   const PixelSet& set,
                                                   const std::vector<Pixel>& endpoints,
                                                   const std::vector<Pixel>& junctions) {
  std::vector<Pixel> node_list = endpoints;
  node_list.insert(node_list.end(), junctions.begin(), junctions.end());
  std::sort(node_list.begin(), node_list.end());
  if (node_list.empty()) return {walk_cycle(sorted, set)};

  PixelSet nodes(node_list.begin(), node_list.end());
  std::unordered_map<Pixel, std::size_t, PixelHash> index;
  for (std::size_t i = 0; i < sorted.size(); ++i) index[sorted[i]] = i;
  std::unordered_set<std::size_t> used;  // directed edge ia * n + ib
  std::size_t n = sorted.size();
  auto mark = [&](const Pixel& a, const Pixel& b) {
    used.insert(index[a] * n + index[b]);
    used.insert(index[b] * n + index[a]);
  };
  auto is_used = [&](const Pixel& a, const Pixel& b) {
    return used.count(index[a] * n + index[b]) != 0;
  };

  std::vector<std::vector<Pixel>> branches;
  for (const Pixel& node : node_list) {
    for (const Pixel& nb : neighbors_in(node, set)) {
      if (is_used(node, nb)) continue;
      std::vector<Pixel> path{node};
      mark(node, nb);
      Pixel prev = node, cur = nb;
      while (true) {
        path.push_back(cur);
        if (nodes.count(cur)) break;
        auto nbrs = neighbors_in(cur, set);
        Pixel next = cur;
        bool found = false;
        for (const Pixel& q : nbrs)
          if (!(q == prev)) {
            next = q;
            found = true;
            break;
          }
        if (!found) break;  // dangling pixel; its terminal is its own node
        mark(cur, next);
        prev = cur;
        cur = next;
      }
      branches.push_back(std::move(path));
    }
  }
  return branches;
}

}  // namespace

bool SkeletonGraph::contains(const Pixel& p) const {
  return std::binary_search(pixels.begin(), pixels.end(), p);
}

std::array<std::vector<Pixel>, 3> classify_points(const std::vector<Pixel>& pixels) {
  PixelSet set(pixels.begin(), pixels.end());
  std::vector<Pixel> sorted(set.begin(), set.end());
  std::sort(sorted.begin(), sorted.end());
  std::array<std::vector<Pixel>, 3> out;
  for (const Pixel& p : sorted) {
    std::size_t n = neighbors_in(p, set).size();
    if (n <= 1)
      out[0].push_back(p);
    else if (n == 2)
      out[1].push_back(p);
    else
      out[2].push_back(p);
  }
  return out;
}

std::vector<Pixel> main_axis(const std::vector<Pixel>& pixels) {
  if (pixels.empty()) throw std::invalid_argument("main_axis: empty pixel set");
  PixelSet set(pixels.begin(), pixels.end());
  std::vector<Pixel> sorted(set.begin(), set.end());
  std::sort(sorted.begin(), sorted.end());

  if (bfs(sorted.front(), set).dist.size() != sorted.size())
    throw std::invalid_argument("main_axis: pixels must form one 8-connected set");

  auto cls = classify_points(sorted);
  const auto& endpoints = cls[0];
  const auto& junctions = cls[2];

  // Terminal candidates: endpoints when present, otherwise junctions
  // (e.g. theta shapes). Neither means a pure cycle.
  const std::vector<Pixel>& terminals = !endpoints.empty() ? endpoints : junctions;
  if (terminals.empty()) return walk_cycle(sorted, set);
  if (terminals.size() == 1) {
    // Lone terminal: run to the farthest-placed pixel.
    const Pixel& start = terminals.front();
    Pixel best = start;
    double best_d = -1.0;
    for (const Pixel& p : sorted) {
      double d = endpoint_distance(start, p);
      if (d > best_d) {
        best_d = d;
        best = p;
      }
    }
    return path_to(bfs(start, set), best);
  }

  // The axis spans the pair with the greatest straight-line separation; the
  // path itself is traced along the skeleton. Strict comparison keeps the
  // first (smallest row-major) pair on ties.
  std::size_t bi = 0, bj = 1;
  double best_d = -1.0;
  for (std::size_t i = 0; i + 1 < terminals.size(); ++i)
    for (std::size_t j = i + 1; j < terminals.size(); ++j) {
      double d = endpoint_distance(terminals[i], terminals[j]);
      if (d > best_d) {
        best_d = d;
        bi = i;
        bj = j;
      }
    }
  return path_to(bfs(terminals[bi], set), terminals[bj]);
}

SkeletonGraph SkeletonGraph::from_pixels(std::vector<Pixel> px) {
  if (px.empty()) throw std::invalid_argument("SkeletonGraph: empty pixel set");
  std::sort(px.begin(), px.end());
  px.erase(std::unique(px.begin(), px.end()), px.end());
  SkeletonGraph g;
  g.pixels = std::move(px);
  PixelSet set(g.pixels.begin(), g.pixels.end());
  auto cls = classify_points(g.pixels);
  g.endpoints = std::move(cls[0]);
  g.junctions = std::move(cls[2]);
  g.branches = decompose_branches(g.pixels, set, g.endpoints, g.junctions);
  g.main_axis = otdet::main_axis(g.pixels);
  g.length = static_cast<int>(g.main_axis.size()) - 1;
  return g;
}

SkeletonGraph thin(const Component& comp) {
  if (comp.pixels.empty()) throw std::invalid_argument("thin: empty component");
  const int pad = 1;
  int w = comp.max_col - comp.min_col + 1 + 2 * pad;
  int h = comp.max_row - comp.min_row + 1 + 2 * pad;
  std::vector<std::uint8_t> grid(static_cast<std::size_t>(w) * h, 0);
  auto at = [&](int r, int c) -> std::uint8_t& {
    return grid[static_cast<std::size_t>(r) * w + c];
  };
  std::size_t remaining = comp.pixels.size();
  for (const Pixel& p : comp.pixels) at(p.row - comp.min_row + pad, p.col - comp.min_col + pad) = 1;

  std::vector<std::pair<int, int>> marks;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int subpass = 0; subpass < 2; ++subpass) {
      marks.clear();
      for (int r = 1; r < h - 1; ++r)
        for (int c = 1; c < w - 1; ++c) {
          if (!at(r, c)) continue;
          // Neighborhood p2..p9 clockwise from north.
          int p2 = at(r - 1, c), p3 = at(r - 1, c + 1), p4 = at(r, c + 1),
              p5 = at(r + 1, c + 1), p6 = at(r + 1, c), p7 = at(r + 1, c - 1),
              p8 = at(r, c - 1), p9 = at(r - 1, c - 1);
          int b = p2 + p3 + p4 + p5 + p6 + p7 + p8 + p9;
          if (b < 2 || b > 6) continue;
          int seq[9] = {p2, p3, p4, p5, p6, p7, p8, p9, p2};
          int a = 0;
          for (int k = 0; k < 8; ++k)
            if (seq[k] == 0 && seq[k + 1] == 1) ++a;
          if (a != 1) continue;
          bool ok = subpass == 0 ? (p2 * p4 * p6 == 0 && p4 * p6 * p8 == 0)
                                 : (p2 * p4 * p8 == 0 && p2 * p6 * p8 == 0);
          if (ok) marks.emplace_back(r, c);
        }
      // A subpass must not erase the component outright; keep the first
      // pixel in scan order if it would.
      if (!marks.empty() && marks.size() == remaining) marks.erase(marks.begin());
      for (auto [r, c] : marks) at(r, c) = 0;
      remaining -= marks.size();
      if (!marks.empty()) changed = true;
    }
  }

  std::vector<Pixel> px;
  px.reserve(remaining);
  for (int r = 1; r < h - 1; ++r)
    for (int c = 1; c < w - 1; ++c)
      if (at(r, c)) px.push_back({r - pad + comp.min_row, c - pad + comp.min_col});
  return SkeletonGraph::from_pixels(std::move(px));
}

std::vector<SkeletonGraph> split_long_branches(const SkeletonGraph& sk,
                                               const PruneParams& p) {
  if (sk.junctions.empty()) return {sk};
  PixelSet axis(sk.main_axis.begin(), sk.main_axis.end());
  PixelSet off;
  for (const Pixel& px : sk.pixels)
    if (!axis.count(px)) off.insert(px);
  if (off.empty()) return {sk};

  double threshold = p.branch_ratio * sk.length;
  PixelSet detached;
  std::vector<std::vector<Pixel>> detached_comps;

  PixelSet seen;
  for (const Pixel& start : sk.pixels) {
    if (!off.count(start) || seen.count(start)) continue;
    // Flood one off-axis component.
    std::vector<Pixel> comp{start};
    seen.insert(start);
    for (std::size_t i = 0; i < comp.size(); ++i)
      for (const Pixel& q : neighbors_in(comp[i], off))
        if (!seen.count(q)) {
          seen.insert(q);
          comp.push_back(q);
        }
    // Geodesic length from the junction: pixels touching the axis are one
    // step from it.
    PixelSet comp_set(comp.begin(), comp.end());
    std::deque<Pixel> queue;
    std::unordered_map<Pixel, int, PixelHash> dist;
    for (const Pixel& px : comp)
      if (!neighbors_in(px, axis).empty()) {
        dist[px] = 1;
        queue.push_back(px);
      }
    int branch_len = 0;
    while (!queue.empty()) {
      Pixel cur = queue.front();
      queue.pop_front();
      branch_len = std::max(branch_len, dist[cur]);
      for (const Pixel& q : neighbors_in(cur, comp_set))
        if (!dist.count(q)) {
          dist[q] = dist[cur] + 1;
          queue.push_back(q);
        }
    }
    if (branch_len > threshold) {
      std::sort(comp.begin(), comp.end());
      for (const Pixel& px : comp) detached.insert(px);
      detached_comps.push_back(std::move(comp));
    }
  }
  if (detached_comps.empty()) return {sk};

  std::vector<Pixel> body;
  for (const Pixel& px : sk.pixels)
    if (!detached.count(px)) body.push_back(px);

  std::sort(detached_comps.begin(), detached_comps.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  std::vector<SkeletonGraph> out;
  out.push_back(SkeletonGraph::from_pixels(std::move(body)));
  for (auto& comp : detached_comps) out.push_back(SkeletonGraph::from_pixels(std::move(comp)));
  return out;
}

std::vector<SkeletonGraph> prune_fragments(const std::vector<SkeletonGraph>& sks,
                                           const PruneParams& p) {
  if (sks.empty()) return {};
  double mean = 0.0;
  for (const auto& sk : sks) mean += sk.length;
  mean /= static_cast<double>(sks.size());
  double threshold = std::max(p.fragment_ratio * mean, p.fragment_floor);
  std::vector<SkeletonGraph> out;
  for (const auto& sk : sks)
    if (sk.length >= threshold) out.push_back(sk);
  return out;
}

std::vector<JoinCandidate> find_join_candidates(const SkeletonGraph& sk,
                                                const std::vector<SkeletonGraph>& pool,
                                                const PruneParams& p) {
  std::vector<JoinCandidate> out;
  double radius = p.join_ratio * sk.length;
  for (const Pixel& e : sk.endpoints) {
    std::vector<JoinCandidate> local;
    for (std::size_t j = 0; j < pool.size(); ++j)
      for (const Pixel& f : pool[j].endpoints) {
        double d = endpoint_distance(e, f);
        if (d <= radius) local.push_back({e, j, f, d});
      }
    std::sort(local.begin(), local.end(), [](const JoinCandidate& a, const JoinCandidate& b) {
      if (a.distance != b.distance) return a.distance < b.distance;
      if (!(a.pool_endpoint == b.pool_endpoint)) return a.pool_endpoint < b.pool_endpoint;
      return a.pool_index < b.pool_index;
    });
    out.insert(out.end(), local.begin(), local.end());
  }
  return out;
}

std::vector<Pixel> bresenham_line(Pixel a, Pixel b) {
  if (b < a) std::swap(a, b);  // canonical direction keeps the set symmetric
  std::vector<Pixel> out;
  int x = a.col, y = a.row;
  int dx = std::abs(b.col - x), sx = x < b.col ? 1 : -1;
  int dy = -std::abs(b.row - y), sy = y < b.row ? 1 : -1;
  int err = dx + dy;
  while (true) {
    out.push_back({y, x});
    if (x == b.col && y == b.row) break;
    int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y += sy;
    }
  }
  return out;
}

SkeletonGraph merge_skeletons(const SkeletonGraph& a, const SkeletonGraph& b,
                              Pixel endpoint_a, Pixel endpoint_b) {
  std::vector<Pixel> px = a.pixels;
  px.insert(px.end(), b.pixels.begin(), b.pixels.end());
  auto line = bresenham_line(endpoint_a, endpoint_b);
  px.insert(px.end(), line.begin(), line.end());
  return SkeletonGraph::from_pixels(std::move(px));
}

SkeletonGraph join_nearby(const SkeletonGraph& sk, const std::vector<SkeletonGraph>& pool,
                          const PruneParams& p,
                          std::optional<std::size_t>* joined_index) {
  if (joined_index) *joined_index = std::nullopt;
  auto cands = find_join_candidates(sk, pool, p);
  if (cands.empty()) return sk;
  std::size_t best = 0;
  for (std::size_t i = 1; i < cands.size(); ++i)
    if (cands[i].distance < cands[best].distance) best = i;
  const JoinCandidate& c = cands[best];
  if (joined_index) *joined_index = c.pool_index;
  return merge_skeletons(sk, pool[c.pool_index], c.endpoint, c.pool_endpoint);
}

}  // namespace otdet

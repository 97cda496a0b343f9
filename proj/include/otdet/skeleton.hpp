#pragma once

#include <array>
#include <optional>
#include <vector>

#include "otdet/raster.hpp"

namespace otdet {

enum class PointClass { Endpoint, Path, Junction };

struct PruneParams {
  /// A side branch longer than branch_ratio * main axis length is detached.
  double branch_ratio = 1.0 / 3.0;
  /// Fragments shorter than max(fragment_ratio * mean length, fragment_floor)
  /// are dropped.
  double fragment_ratio = 1.0 / 7.0;
  double fragment_floor = 15.0;
  /// Endpoints closer than join_ratio * length are bridge candidates.
  double join_ratio = 0.1;
};

/// A thinned stroke with its derived structure. Construct through
/// from_pixels so every instance carries a consistent classification, branch
/// decomposition and main axis.
struct SkeletonGraph {
  std::vector<Pixel> pixels;     // row-major
  std::vector<Pixel> endpoints;  // row-major
  std::vector<Pixel> junctions;  // row-major
  /// Node-to-node paths (both terminal nodes included). Isolated cycles give
  /// a single closed path.
  std::vector<std::vector<Pixel>> branches;
  /// Geodesic path between the two farthest-placed endpoints; a pure cycle
  /// is its own main axis.
  std::vector<Pixel> main_axis;
  /// Step count along the main axis (diagonal steps count as one).
  int length = 0;

  bool contains(const Pixel& p) const;
  static SkeletonGraph from_pixels(std::vector<Pixel> px);
};

/// Zhang-Suen thinning of a component. The result preserves 8-connectivity
/// and is one pixel wide except at junctions.
SkeletonGraph thin(const Component& comp);

/// Splits skeleton pixels by 8-neighbor count within the set: 1 neighbor is
/// an endpoint, 2 is a path point, more is a junction. An isolated pixel
/// counts as an endpoint. Returns {endpoints, path points, junctions},
/// each row-major.
std::array<std::vector<Pixel>, 3> classify_points(const std::vector<Pixel>& pixels);

/// Geodesic path traced between the two endpoints with the greatest
/// straight-line separation, ties broken by the smallest row-major pair. A
/// set with one endpoint runs to its farthest-placed pixel; a pure cycle
/// returns the cycle walked from its smallest pixel.
std::vector<Pixel> main_axis(const std::vector<Pixel>& pixels);

/// Detaches side branches longer than branch_ratio * main axis length by
/// severing them at their junction; the junction pixel stays with the main
/// body. Result: the main body first, then detached branches in row-major
/// order of their first pixel. A skeleton with no long branch is returned
/// unchanged as the only element.
std::vector<SkeletonGraph> split_long_branches(const SkeletonGraph& sk,
                                               const PruneParams& p);

/// Drops skeletons shorter than max(fragment_ratio * mean length,
/// fragment_floor). Order is preserved.
std::vector<SkeletonGraph> prune_fragments(const std::vector<SkeletonGraph>& sks,
                                           const PruneParams& p);

struct JoinCandidate {
  Pixel endpoint;       // endpoint of the querying skeleton
  std::size_t pool_index = 0;
  Pixel pool_endpoint;  // nearest endpoint of the pool skeleton
  double distance = 0.0;
};

/// Pool endpoints within join_ratio * sk.length (Euclidean, inclusive) of an
/// endpoint of sk. Candidates are reported per sk endpoint in row-major
/// endpoint order; ties inside one endpoint resolve to the smaller distance,
/// then row-major pool endpoint.
std::vector<JoinCandidate> find_join_candidates(const SkeletonGraph& sk,
                                                const std::vector<SkeletonGraph>& pool,
                                                const PruneParams& p);

/// Straight-line pixels from a to b (endpoints included). Symmetric: the
/// line for (b, a) is the same set.
std::vector<Pixel> bresenham_line(Pixel a, Pixel b);

/// Union of two skeletons plus the bridge between the given endpoints.
SkeletonGraph merge_skeletons(const SkeletonGraph& a, const SkeletonGraph& b,
                              Pixel endpoint_a, Pixel endpoint_b);

/// Joins sk with the nearest in-radius pool skeleton, if any. With no
/// candidate the input is returned unchanged; joined_index reports which pool
/// entry was consumed.
SkeletonGraph join_nearby(const SkeletonGraph& sk, const std::vector<SkeletonGraph>& pool,
                          const PruneParams& p,
                          std::optional<std::size_t>* joined_index = nullptr);

}  // namespace otdet

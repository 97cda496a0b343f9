#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "otdet/hmm.hpp"
#include "otdet/patchgeom.hpp"

namespace otdet {

struct VerifyParams {
  /// Acceptance threshold on the text posterior; accept iff score >= t_v.
  double t_v = 0.44;
};

struct VerifiedRegion {
  TextPatch patch;
  double score = 0.0;
  bool accepted = false;
  std::string reason;  // diagnostic for structural rejections
};

/// Rectifies the patch, extracts its feature sequence and scores it against
/// the model pair. Accepts iff score >= t_v. A patch too narrow or too
/// degenerate to produce one feature window is rejected with score 0.
VerifiedRegion verify_patch(const TextPatch& patch, const ModelPair& models,
                            const VerifyParams& vp, const PhogParams& phog,
                            ScoreMode mode = ScoreMode::PerFrame);

using SkeletonScorer = std::function<double(const SkeletonGraph&)>;

struct JunctionResolution {
  /// The survivor: the two best candidates joined, a lone survivor
  /// unchanged, or nothing when every candidate scores below threshold.
  std::optional<SkeletonGraph> merged;
  /// Candidate indices merged into the result.
  std::vector<std::size_t> joined;
  /// Candidate indices rejected by the threshold; discarded for good.
  std::vector<std::size_t> discarded;
  std::vector<double> scores;  // one per candidate
};

/// Arbitrates candidates competing around a junction. Each candidate is
/// scored; those under t_v are discarded; the two best survivors are joined
/// at their nearest endpoint pair. Score ties prefer the longer skeleton,
/// then the earlier row-major start pixel.
JunctionResolution resolve_junction(const std::vector<SkeletonGraph>& candidates,
                                    const SkeletonScorer& scorer,
                                    const VerifyParams& vp);

}  // namespace otdet

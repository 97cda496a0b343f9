#include "otdet/verify.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace otdet {

VerifiedRegion verify_patch(const TextPatch& patch, const ModelPair& models,
                            const VerifyParams& vp, const PhogParams& phog,
                            ScoreMode mode) {
  VerifiedRegion out;
  out.patch = patch;
  GrayImage strip;
  try {
    strip = rectify(patch, phog.window_height);
  } catch (const std::exception& e) {
    out.reason = std::string("rectification failed: ") + e.what();
    return out;
  }
  if (strip.width < phog.window_width) {
    out.reason = "rectified strip narrower than one feature window";
    return out;
  }
  FeatureSequence seq = phog_sequence(strip, phog);
  ScoredSequence scored = classify(models, seq, mode);
  out.score = scored.score;
  out.accepted = out.score >= vp.t_v;
  return out;
}

JunctionResolution resolve_junction(const std::vector<SkeletonGraph>& candidates,
                                    const SkeletonScorer& scorer,
                                    const VerifyParams& vp) {
  JunctionResolution res;
  res.scores.reserve(candidates.size());
  std::vector<std::size_t> survivors;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    double s = scorer(candidates[i]);
    res.scores.push_back(s);
    if (s >= vp.t_v)
      survivors.push_back(i);
    else
      res.discarded.push_back(i);
  }
  std::sort(survivors.begin(), survivors.end(), [&](std::size_t a, std::size_t b) {
    if (res.scores[a] != res.scores[b]) return res.scores[a] > res.scores[b];
    if (candidates[a].length != candidates[b].length)
      return candidates[a].length > candidates[b].length;
    return candidates[a].pixels.front() < candidates[b].pixels.front();
  });
  if (survivors.empty()) return res;
  if (survivors.size() == 1) {
    res.merged = candidates[survivors[0]];
    res.joined = {survivors[0]};
    return res;
  }

  const SkeletonGraph& a = candidates[survivors[0]];
  const SkeletonGraph& b = candidates[survivors[1]];
  // Cycles have no endpoints; fall back to the full pixel set.
  const auto& set_a = a.endpoints.empty() ? a.pixels : a.endpoints;
  const auto& set_b = b.endpoints.empty() ? b.pixels : b.endpoints;
  Pixel ea = set_a.front(), eb = set_b.front();
  double best = std::numeric_limits<double>::max();
  for (const Pixel& pa : set_a)
    for (const Pixel& pb : set_b) {
      double d = euclidean(pa, pb);
      if (d < best) {
        best = d;
        ea = pa;
        eb = pb;
      }
    }
  res.merged = merge_skeletons(a, b, ea, eb);
  res.joined = {survivors[0], survivors[1]};
  return res;
}

}  // namespace otdet

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "otdet/phog.hpp"

namespace otdet {

enum class PatchLabel : std::uint8_t { NonText = 0, Text = 1 };

/// Diagonal-covariance Gaussian mixture attached to one state.
struct GmmState {
  std::vector<double> weights;             // mixture count M
  std::vector<std::vector<double>> means;  // M x dim
  std::vector<std::vector<double>> vars;   // M x dim, diagonal entries
};

struct HmmModel {
  int states = 0;
  int mixtures = 0;
  int dim = 0;
  std::vector<double> pi;
  std::vector<std::vector<double>> trans;  // states x states
  std::vector<GmmState> emissions;
  PatchLabel label = PatchLabel::Text;
  double prior = 0.5;
};

struct TrainOptions {
  int states = 6;
  int mixtures = 32;
  std::uint64_t seed = 0;
  int max_iters = 100;
  double rel_tol = 1e-6;
  /// Left-to-right topology: start in state 0, self-loop or advance one
  /// state. False trains a fully connected chain.
  bool left_to_right = true;
  int jobs = 1;
};

struct TrainResult {
  HmmModel model;
  /// Total data log-likelihood after each EM iteration.
  std::vector<double> loglik_history;
  /// Sequences shorter than the state count, which were skipped.
  int skipped_sequences = 0;
};

/// Log-likelihood log P(O | model) by the forward recursion in log space.
double forward_loglik(const HmmModel& model, const FeatureSequence& seq);

/// Most likely state path and its joint log-likelihood. Score ties resolve
/// to the lower state index.
std::pair<std::vector<int>, double> viterbi(const HmmModel& model,
                                            const FeatureSequence& seq);

/// Baum-Welch over the sequence set: k-means initialization of the mixtures
/// from pooled frames, uniform mixture weights, data-variance covariances,
/// then EM until the relative log-likelihood improvement drops below rel_tol
/// or max_iters. Deterministic for a fixed seed and any job count.
TrainResult train(const std::vector<FeatureSequence>& seqs, const TrainOptions& opt);

struct ModelPair {
  HmmModel text;
  HmmModel nontext;
};

/// Trains both class models; each class prior is its share of the training
/// sequences.
ModelPair train_pair(const std::vector<FeatureSequence>& text_seqs,
                     const std::vector<FeatureSequence>& nontext_seqs,
                     const TrainOptions& opt);

enum class ScoreMode {
  /// Length-normalized: per-frame averaged log-likelihoods enter the
  /// posterior, keeping a fixed threshold meaningful across strip widths.
  PerFrame,
  /// Raw sequence posteriors; saturates toward 0/1 for long sequences.
  Raw,
};

struct ScoredSequence {
  double loglik_text = 0.0;
  double loglik_nontext = 0.0;
  int frames = 0;
  /// Posterior probability of the text class, in [0, 1].
  double score = 0.0;
};

ScoredSequence classify(const HmmModel& text, const HmmModel& nontext,
                        const FeatureSequence& seq,
                        ScoreMode mode = ScoreMode::PerFrame);
ScoredSequence classify(const ModelPair& models, const FeatureSequence& seq,
                        ScoreMode mode = ScoreMode::PerFrame);

/// Little-endian binary model file, bit-exact round trip.
void save_model(const HmmModel& model, const std::string& path);
HmmModel load_model(const std::string& path);

}  // namespace otdet

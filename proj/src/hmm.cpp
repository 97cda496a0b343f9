#include "otdet/hmm.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <cstring>
#include <fstream>
#include <limits>
#include <mutex>
#include <numbers>
#include <random>
#include <stdexcept>
#include <thread>

#include "otdet/raster.hpp"

namespace otdet {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logsumexp(const double* v, int n) {
  double m = kNegInf;
  for (int i = 0; i < n; ++i) m = std::max(m, v[i]);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}

/// Per-iteration cache of emission terms: log weights, Gaussian
/// normalization constants, and inverse variances.
struct EmissionCache {
  int states, mixtures, dim;
  std::vector<double> log_w;      // S*M
  std::vector<double> log_const;  // S*M
  std::vector<double> inv_var;    // S*M*dim
  std::vector<double> log_trans;  // S*S
  std::vector<double> log_pi;     // S

  explicit EmissionCache(const HmmModel& m)
      : states(m.states), mixtures(m.mixtures), dim(m.dim) {
    log_w.resize(static_cast<std::size_t>(states) * mixtures);
    log_const.resize(log_w.size());
    inv_var.resize(log_w.size() * dim);
    log_trans.resize(static_cast<std::size_t>(states) * states);
    log_pi.resize(states);
    for (int j = 0; j < states; ++j) {
      log_pi[j] = m.pi[j] > 0.0 ? std::log(m.pi[j]) : kNegInf;
      for (int k = 0; k < states; ++k)
        log_trans[j * states + k] =
            m.trans[j][k] > 0.0 ? std::log(m.trans[j][k]) : kNegInf;
      for (int mi = 0; mi < mixtures; ++mi) {
        std::size_t jm = static_cast<std::size_t>(j) * mixtures + mi;
        double w = m.emissions[j].weights[mi];
        log_w[jm] = w > 0.0 ? std::log(w) : kNegInf;
        double c = 0.0;
        for (int d = 0; d < dim; ++d) {
          double var = m.emissions[j].vars[mi][d];
          c += std::log(2.0 * std::numbers::pi * var);
          inv_var[jm * dim + d] = 1.0 / var;
        }
        log_const[jm] = -0.5 * c;
      }
    }
  }

  double log_gauss(int j, int mi, const HmmModel& m, const double* o) const {
    std::size_t jm = static_cast<std::size_t>(j) * mixtures + mi;
    const double* mu = m.emissions[j].means[mi].data();
    const double* iv = &inv_var[jm * dim];
    double q = 0.0;
    for (int d = 0; d < dim; ++d) {
      double diff = o[d] - mu[d];
      q += diff * diff * iv[d];
    }
    return log_const[jm] - 0.5 * q;
  }
};

void check_seq(const HmmModel& model, const FeatureSequence& seq) {
  if (model.states <= 0) throw std::invalid_argument("hmm: empty model");
  if (seq.frames.empty()) throw std::invalid_argument("hmm: empty sequence");
  for (const auto& f : seq.frames)
    if (static_cast<int>(f.size()) != model.dim)
      throw std::invalid_argument("hmm: frame dimension mismatch");
}

/// logb[t*S + j] = log emission density of frame t in state j; logbm, when
/// non-null, additionally stores per-mixture terms log(w_m) + log N_m.
void emission_logs(const HmmModel& model, const EmissionCache& cache,
                   const FeatureSequence& seq, std::vector<double>& logb,
                   std::vector<double>* logbm) {
  int S = model.states, M = model.mixtures;
  int T = static_cast<int>(seq.frames.size());
  logb.assign(static_cast<std::size_t>(T) * S, kNegInf);
  if (logbm) logbm->assign(static_cast<std::size_t>(T) * S * M, kNegInf);
  std::vector<double> terms(M);
  for (int t = 0; t < T; ++t) {
    const double* o = seq.frames[t].data();
    for (int j = 0; j < S; ++j) {
      for (int mi = 0; mi < M; ++mi) {
        std::size_t jm = static_cast<std::size_t>(j) * M + mi;
        double lw = cache.log_w[jm];
        terms[mi] = lw == kNegInf ? kNegInf : lw + cache.log_gauss(j, mi, model, o);
        if (logbm) (*logbm)[(static_cast<std::size_t>(t) * S + j) * M + mi] = terms[mi];
      }
      logb[static_cast<std::size_t>(t) * S + j] = logsumexp(terms.data(), M);
    }
  }
}

double forward_pass(const HmmModel& model, const EmissionCache& cache,
                    const std::vector<double>& logb, int T,
                    std::vector<double>* alpha_out) {
  int S = model.states;
  std::vector<double> alpha(static_cast<std::size_t>(T) * S, kNegInf);
  for (int j = 0; j < S; ++j) alpha[j] = cache.log_pi[j] + logb[j];
  std::vector<double> terms(S);
  for (int t = 1; t < T; ++t)
    for (int j = 0; j < S; ++j) {
      for (int i = 0; i < S; ++i)
        terms[i] = alpha[(t - 1) * static_cast<std::size_t>(S) + i] +
                   cache.log_trans[i * S + j];
      alpha[t * static_cast<std::size_t>(S) + j] =
          logsumexp(terms.data(), S) + logb[t * static_cast<std::size_t>(S) + j];
    }
  double ll = logsumexp(&alpha[(T - 1) * static_cast<std::size_t>(S)], S);
  if (alpha_out) *alpha_out = std::move(alpha);
  return ll;
}

void backward_pass(const HmmModel& model, const EmissionCache& cache,
                   const std::vector<double>& logb, int T,
                   std::vector<double>& beta) {
  int S = model.states;
  beta.assign(static_cast<std::size_t>(T) * S, 0.0);
  std::vector<double> terms(S);
  for (int t = T - 2; t >= 0; --t)
    for (int i = 0; i < S; ++i) {
      for (int j = 0; j < S; ++j)
        terms[j] = cache.log_trans[i * S + j] +
                   logb[(t + 1) * static_cast<std::size_t>(S) + j] +
                   beta[(t + 1) * static_cast<std::size_t>(S) + j];
      beta[t * static_cast<std::size_t>(S) + i] = logsumexp(terms.data(), S);
    }
}

/// Sufficient statistics contributed by one sequence.
struct SeqStats {
  double loglik = 0.0;
  std::vector<double> pi_num;     // S
  std::vector<double> trans_num;  // S*S
  std::vector<double> trans_den;  // S
  std::vector<double> occ;        // S*M
  std::vector<double> mean_num;   // S*M*dim
  std::vector<double> sq_num;     // S*M*dim

  SeqStats(int S, int M, int dim)
      : pi_num(S, 0.0),
        trans_num(static_cast<std::size_t>(S) * S, 0.0),
        trans_den(S, 0.0),
        occ(static_cast<std::size_t>(S) * M, 0.0),
        mean_num(static_cast<std::size_t>(S) * M * dim, 0.0),
        sq_num(static_cast<std::size_t>(S) * M * dim, 0.0) {}

  void add(const SeqStats& o) {
    loglik += o.loglik;
    auto acc = [](std::vector<double>& a, const std::vector<double>& b) {
      for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    };
    acc(pi_num, o.pi_num);
    acc(trans_num, o.trans_num);
    acc(trans_den, o.trans_den);
    acc(occ, o.occ);
    acc(mean_num, o.mean_num);
    acc(sq_num, o.sq_num);
  }
};

SeqStats expectation_step(const HmmModel& model, const EmissionCache& cache,
                          const FeatureSequence& seq) {
  int S = model.states, M = model.mixtures, D = model.dim;
  int T = static_cast<int>(seq.frames.size());
  SeqStats st(S, M, D);
  std::vector<double> logb, logbm, alpha, beta;
  emission_logs(model, cache, seq, logb, &logbm);
  st.loglik = forward_pass(model, cache, logb, T, &alpha);
  backward_pass(model, cache, logb, T, beta);
  double ll = st.loglik;
  if (!std::isfinite(ll)) return st;  // impossible sequence adds nothing

  for (int t = 0; t < T; ++t) {
    const double* o = seq.frames[t].data();
    for (int j = 0; j < S; ++j) {
      std::size_t ts = static_cast<std::size_t>(t) * S + j;
      double lgamma = alpha[ts] + beta[ts] - ll;
      if (lgamma == kNegInf) continue;
      double gamma = std::exp(lgamma);
      if (t == 0) st.pi_num[j] += gamma;
      if (t < T - 1) st.trans_den[j] += gamma;
      double lb = logb[ts];
      for (int mi = 0; mi < M; ++mi) {
        double lterm = logbm[ts * M + mi];
        if (lterm == kNegInf) continue;
        double g = std::exp(lgamma + lterm - lb);
        std::size_t jm = static_cast<std::size_t>(j) * M + mi;
        st.occ[jm] += g;
        double* mn = &st.mean_num[jm * D];
        double* sq = &st.sq_num[jm * D];
        for (int d = 0; d < D; ++d) {
          mn[d] += g * o[d];
          sq[d] += g * o[d] * o[d];
        }
      }
    }
    if (t < T - 1)
      for (int i = 0; i < S; ++i) {
        std::size_t ti = static_cast<std::size_t>(t) * S + i;
        if (alpha[ti] == kNegInf) continue;
        for (int j = 0; j < S; ++j) {
          double lt = cache.log_trans[i * S + j];
          if (lt == kNegInf) continue;
          std::size_t t1j = static_cast<std::size_t>(t + 1) * S + j;
          double lxi = alpha[ti] + lt + logb[t1j] + beta[t1j] - ll;
          if (lxi != kNegInf) st.trans_num[i * S + j] += std::exp(lxi);
        }
      }
  }
  return st;
}

/// Runs the E-step over all sequences. Per-sequence statistics are merged
/// strictly in sequence order, so results are bit-identical for any job
/// count.
SeqStats parallel_estep(const HmmModel& model, const EmissionCache& cache,
                        const std::vector<const FeatureSequence*>& seqs, int jobs) {
  SeqStats total(model.states, model.mixtures, model.dim);
  int n = static_cast<int>(seqs.size());
  if (jobs <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) total.add(expectation_step(model, cache, *seqs[i]));
    return total;
  }
  std::atomic<int> next_fetch{0};
  std::mutex merge_mutex;
  std::condition_variable merge_cv;
  int next_merge = 0;
  auto worker = [&]() {
    for (;;) {
      int i = next_fetch.fetch_add(1);
      if (i >= n) return;
      SeqStats st = expectation_step(model, cache, *seqs[i]);
      std::unique_lock<std::mutex> lock(merge_mutex);
      merge_cv.wait(lock, [&] { return next_merge == i; });
      total.add(st);
      ++next_merge;
      merge_cv.notify_all();
    }
  };
  std::vector<std::thread> pool;
  int nthreads = std::min(jobs, n);
  pool.reserve(nthreads);
  for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return total;
}

/// Seeded k-means++ followed by Lloyd iterations. Returns k centers; with
/// fewer points than centers, surplus centers coincide with existing ones.
std::vector<std::vector<double>> kmeans(const std::vector<const double*>& pts, int dim,
                                        int k, std::mt19937_64& rng) {
  int n = static_cast<int>(pts.size());
  auto dist2 = [dim](const double* a, const double* b) {
    double s = 0.0;
    for (int d = 0; d < dim; ++d) {
      double diff = a[d] - b[d];
      s += diff * diff;
    }
    return s;
  };
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::vector<double>> centers;
  centers.reserve(k);
  std::vector<double> mind(n, std::numeric_limits<double>::max());
  {
    int first = static_cast<int>(unif(rng) * n);
    first = std::min(first, n - 1);
    centers.emplace_back(pts[first], pts[first] + dim);
  }
  while (static_cast<int>(centers.size()) < k) {
    const double* last = centers.back().data();
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      mind[i] = std::min(mind[i], dist2(pts[i], last));
      total += mind[i];
    }
    int pick = 0;
    if (total > 0.0) {
      double u = unif(rng) * total, cum = 0.0;
      for (; pick < n - 1; ++pick) {
        cum += mind[pick];
        if (u <= cum) break;
      }
    } else {
      pick = std::min(static_cast<int>(unif(rng) * n), n - 1);
    }
    centers.emplace_back(pts[pick], pts[pick] + dim);
  }

  std::vector<int> assign(n, -1);
  for (int iter = 0; iter < 30; ++iter) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double bd = dist2(pts[i], centers[0].data());
      for (int c = 1; c < k; ++c) {
        double d = dist2(pts[i], centers[c].data());
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
    }
    if (!changed) break;
    for (int c = 0; c < k; ++c) {
      std::vector<double> sum(dim, 0.0);
      int cnt = 0;
      for (int i = 0; i < n; ++i)
        if (assign[i] == c) {
          for (int d = 0; d < dim; ++d) sum[d] += pts[i][d];
          ++cnt;
        }
      if (cnt > 0)
        for (int d = 0; d < dim; ++d) centers[c][d] = sum[d] / cnt;
    }
  }
  return centers;
}

}  // namespace

double forward_loglik(const HmmModel& model, const FeatureSequence& seq) {
  check_seq(model, seq);
  EmissionCache cache(model);
  std::vector<double> logb;
  emission_logs(model, cache, seq, logb, nullptr);
  return forward_pass(model, cache, logb, static_cast<int>(seq.frames.size()), nullptr);
}

std::pair<std::vector<int>, double> viterbi(const HmmModel& model,
                                            const FeatureSequence& seq) {
  check_seq(model, seq);
  EmissionCache cache(model);
  std::vector<double> logb;
  emission_logs(model, cache, seq, logb, nullptr);
  int S = model.states;
  int T = static_cast<int>(seq.frames.size());
  std::vector<double> delta(static_cast<std::size_t>(T) * S, kNegInf);
  std::vector<int> back(static_cast<std::size_t>(T) * S, 0);
  for (int j = 0; j < S; ++j) delta[j] = cache.log_pi[j] + logb[j];
  for (int t = 1; t < T; ++t)
    for (int j = 0; j < S; ++j) {
      double best = kNegInf;
      int arg = 0;
      for (int i = 0; i < S; ++i) {
        double v = delta[(t - 1) * static_cast<std::size_t>(S) + i] +
                   cache.log_trans[i * S + j];
        if (v > best) {  // strict: ties keep the lower state index
          best = v;
          arg = i;
        }
      }
      delta[t * static_cast<std::size_t>(S) + j] =
          best + logb[t * static_cast<std::size_t>(S) + j];
      back[t * static_cast<std::size_t>(S) + j] = arg;
    }
  double best = kNegInf;
  int arg = 0;
  for (int j = 0; j < S; ++j) {
    double v = delta[(T - 1) * static_cast<std::size_t>(S) + j];
    if (v > best) {
      best = v;
      arg = j;
    }
  }
  std::vector<int> path(T);
  path[T - 1] = arg;
  for (int t = T - 1; t > 0; --t) path[t - 1] = back[t * static_cast<std::size_t>(S) + path[t]];
  return {std::move(path), best};
}

TrainResult train(const std::vector<FeatureSequence>& seqs, const TrainOptions& opt) {
  if (opt.states < 1 || opt.mixtures < 1)
    throw std::invalid_argument("train: states and mixtures must be positive");
  TrainResult result;
  std::vector<const FeatureSequence*> used;
  for (const auto& s : seqs) {
    if (static_cast<int>(s.frames.size()) < opt.states) {
      ++result.skipped_sequences;
      continue;
    }
    used.push_back(&s);
  }
  if (used.empty()) throw std::invalid_argument("train: no usable sequences");
  int D = static_cast<int>(used[0]->frames[0].size());
  for (const auto* s : used)
    for (const auto& f : s->frames)
      if (static_cast<int>(f.size()) != D)
        throw std::invalid_argument("train: inconsistent frame dimension");

  int S = opt.states, M = opt.mixtures;
  HmmModel model;
  model.states = S;
  model.mixtures = M;
  model.dim = D;

  // Topology and start distribution.
  model.pi.assign(S, opt.left_to_right ? 0.0 : 1.0 / S);
  if (opt.left_to_right) model.pi[0] = 1.0;
  model.trans.assign(S, std::vector<double>(S, 0.0));
  for (int i = 0; i < S; ++i) {
    if (opt.left_to_right) {
      if (i + 1 < S) {
        model.trans[i][i] = 0.5;
        model.trans[i][i + 1] = 0.5;
      } else {
        model.trans[i][i] = 1.0;
      }
    } else {
      for (int j = 0; j < S; ++j) model.trans[i][j] = 1.0 / S;
    }
  }

  // Global per-dimension variance, reused as the re-estimation floor.
  std::vector<double> gmean(D, 0.0), gvar(D, 0.0);
  std::size_t nframes = 0;
  for (const auto* s : used)
    for (const auto& f : s->frames) {
      for (int d = 0; d < D; ++d) gmean[d] += f[d];
      ++nframes;
    }
  for (int d = 0; d < D; ++d) gmean[d] /= static_cast<double>(nframes);
  for (const auto* s : used)
    for (const auto& f : s->frames)
      for (int d = 0; d < D; ++d) {
        double diff = f[d] - gmean[d];
        gvar[d] += diff * diff;
      }
  // Floor at 1% of the per-dimension global variance (the usual speech-
  // tooling convention); tighter floors let mixtures memorize small corpora
  // and collapse the likelihood of unseen data.
  std::vector<double> var_floor(D);
  for (int d = 0; d < D; ++d) {
    gvar[d] /= static_cast<double>(nframes);
    var_floor[d] = std::max(1e-2 * gvar[d], 1e-12);
  }

  // Flat start: uniform segmentation pools frames per state, then seeded
  // k-means places the mixture means. Uniform weights, shared state variance.
  std::mt19937_64 rng(opt.seed);
  model.emissions.resize(S);
  for (int j = 0; j < S; ++j) {
    std::vector<const double*> pool;
    for (const auto* s : used) {
      int T = static_cast<int>(s->frames.size());
      for (int t = 0; t < T; ++t)
        if (t * S / T == j) pool.push_back(s->frames[t].data());
    }
    std::vector<double> smean(D, 0.0), svar(D, 0.0);
    for (const double* p : pool)
      for (int d = 0; d < D; ++d) smean[d] += p[d];
    for (int d = 0; d < D; ++d) smean[d] /= static_cast<double>(pool.size());
    for (const double* p : pool)
      for (int d = 0; d < D; ++d) {
        double diff = p[d] - smean[d];
        svar[d] += diff * diff;
      }
    for (int d = 0; d < D; ++d)
      svar[d] = std::max(svar[d] / static_cast<double>(pool.size()), var_floor[d]);

    GmmState& em = model.emissions[j];
    em.weights.assign(M, 1.0 / M);
    em.means = kmeans(pool, D, M, rng);
    em.vars.assign(M, svar);
  }

  // EM. history[k] is the data log-likelihood under the parameters entering
  // iteration k, so the recorded sequence is non-decreasing.
  double prev_ll = kNegInf;
  for (int iter = 0; iter < opt.max_iters; ++iter) {
    EmissionCache cache(model);
    SeqStats st = parallel_estep(model, cache, used, opt.jobs);
    result.loglik_history.push_back(st.loglik);

    if (!opt.left_to_right) {
      double total = 0.0;
      for (int j = 0; j < S; ++j) total += st.pi_num[j];
      if (total > 0.0)
        for (int j = 0; j < S; ++j) model.pi[j] = st.pi_num[j] / total;
    }
    for (int i = 0; i < S; ++i) {
      if (st.trans_den[i] <= 0.0) continue;
      double row = 0.0;
      for (int j = 0; j < S; ++j) row += st.trans_num[i * S + j];
      if (row <= 0.0) continue;
      for (int j = 0; j < S; ++j) model.trans[i][j] = st.trans_num[i * S + j] / row;
    }
    for (int j = 0; j < S; ++j) {
      double socc = 0.0;
      for (int mi = 0; mi < M; ++mi) socc += st.occ[j * M + mi];
      if (socc <= 0.0) continue;  // starved state keeps its parameters
      GmmState& em = model.emissions[j];
      for (int mi = 0; mi < M; ++mi) {
        std::size_t jm = static_cast<std::size_t>(j) * M + mi;
        double g = st.occ[jm];
        em.weights[mi] = g / socc;
        if (g < 1e-10) continue;  // starved mixture keeps mean and variance
        for (int d = 0; d < D; ++d) {
          double mean = st.mean_num[jm * D + d] / g;
          double var = st.sq_num[jm * D + d] / g - mean * mean;
          em.means[mi][d] = mean;
          em.vars[mi][d] = std::max(var, var_floor[d]);
        }
      }
    }

    if (iter > 0) {
      double denom = std::max(std::abs(prev_ll), 1.0);
      if ((st.loglik - prev_ll) / denom < opt.rel_tol) break;
    }
    prev_ll = st.loglik;
  }

  result.model = std::move(model);
  return result;
}

ModelPair train_pair(const std::vector<FeatureSequence>& text_seqs,
                     const std::vector<FeatureSequence>& nontext_seqs,
                     const TrainOptions& opt) {
  if (text_seqs.empty() || nontext_seqs.empty())
    throw std::invalid_argument("train_pair: both classes need sequences");
  double total = static_cast<double>(text_seqs.size() + nontext_seqs.size());
  ModelPair pair;
  pair.text = train(text_seqs, opt).model;
  pair.text.label = PatchLabel::Text;
  pair.text.prior = static_cast<double>(text_seqs.size()) / total;
  pair.nontext = train(nontext_seqs, opt).model;
  pair.nontext.label = PatchLabel::NonText;
  pair.nontext.prior = static_cast<double>(nontext_seqs.size()) / total;
  return pair;
}

ScoredSequence classify(const HmmModel& text, const HmmModel& nontext,
                        const FeatureSequence& seq, ScoreMode mode) {
  ScoredSequence s;
  s.frames = static_cast<int>(seq.frames.size());
  s.loglik_text = forward_loglik(text, seq);
  s.loglik_nontext = forward_loglik(nontext, seq);
  double lt = s.loglik_text + (text.prior > 0.0 ? std::log(text.prior) : kNegInf);
  double ln = s.loglik_nontext + (nontext.prior > 0.0 ? std::log(nontext.prior) : kNegInf);
  if (mode == ScoreMode::PerFrame && s.frames > 0) {
    lt /= s.frames;
    ln /= s.frames;
  }
  if (lt == kNegInf && ln == kNegInf) {
    s.score = 0.5;
  } else if (lt >= ln) {
    s.score = 1.0 / (1.0 + std::exp(ln - lt));
  } else {
    double e = std::exp(lt - ln);
    s.score = e / (1.0 + e);
  }
  return s;
}

ScoredSequence classify(const ModelPair& models, const FeatureSequence& seq,
                        ScoreMode mode) {
  return classify(models.text, models.nontext, seq, mode);
}

namespace {

constexpr char kModelMagic[6] = {'O', 'T', 'H', 'M', 'M', '1'};

void write_doubles(std::ofstream& f, const std::vector<double>& v) {
  f.write(reinterpret_cast<const char*>(v.data()),
          static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void read_doubles(std::ifstream& f, std::vector<double>& v) {
  f.read(reinterpret_cast<char*>(v.data()),
         static_cast<std::streamsize>(v.size() * sizeof(double)));
}

}  // namespace

void save_model(const HmmModel& model, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open file for writing: " + path);
  f.write(kModelMagic, 6);
  std::uint32_t hdr[3] = {static_cast<std::uint32_t>(model.states),
                          static_cast<std::uint32_t>(model.mixtures),
                          static_cast<std::uint32_t>(model.dim)};
  f.write(reinterpret_cast<const char*>(hdr), sizeof(hdr));
  write_doubles(f, model.pi);
  for (const auto& row : model.trans) write_doubles(f, row);
  for (const auto& em : model.emissions) {
    write_doubles(f, em.weights);
    for (const auto& m : em.means) write_doubles(f, m);
    for (const auto& v : em.vars) write_doubles(f, v);
  }
  std::uint8_t label = static_cast<std::uint8_t>(model.label);
  f.write(reinterpret_cast<const char*>(&label), 1);
  f.write(reinterpret_cast<const char*>(&model.prior), sizeof(double));
  if (!f) throw IoError("model write failed: " + path);
}

HmmModel load_model(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open file: " + path);
  char magic[6];
  f.read(magic, 6);
  if (!f || std::memcmp(magic, kModelMagic, 6) != 0)
    throw FormatError("not a model file: " + path);
  std::uint32_t hdr[3];
  f.read(reinterpret_cast<char*>(hdr), sizeof(hdr));
  if (!f) throw FormatError("truncated model file: " + path);
  HmmModel model;
  model.states = static_cast<int>(hdr[0]);
  model.mixtures = static_cast<int>(hdr[1]);
  model.dim = static_cast<int>(hdr[2]);
  if (model.states < 1 || model.mixtures < 1 || model.dim < 1 ||
      model.states > 4096 || model.mixtures > 4096 || model.dim > (1 << 20))
    throw FormatError("implausible model header: " + path);
  model.pi.resize(model.states);
  read_doubles(f, model.pi);
  model.trans.assign(model.states, std::vector<double>(model.states));
  for (auto& row : model.trans) read_doubles(f, row);
  model.emissions.resize(model.states);
  for (auto& em : model.emissions) {
    em.weights.resize(model.mixtures);
    read_doubles(f, em.weights);
    em.means.assign(model.mixtures, std::vector<double>(model.dim));
    for (auto& m : em.means) read_doubles(f, m);
    em.vars.assign(model.mixtures, std::vector<double>(model.dim));
    for (auto& v : em.vars) read_doubles(f, v);
  }
  std::uint8_t label = 0;
  f.read(reinterpret_cast<char*>(&label), 1);
  f.read(reinterpret_cast<char*>(&model.prior), sizeof(double));
  if (!f) throw FormatError("truncated model file: " + path);
  model.label = label ? PatchLabel::Text : PatchLabel::NonText;
  return model;
}

}  // namespace otdet

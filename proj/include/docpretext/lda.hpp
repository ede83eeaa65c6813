#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "docpretext/common.hpp"
#include "docpretext/rng.hpp"
#include "docpretext/sample.hpp"
#include "docpretext/text.hpp"

namespace docpretext {

struct TopicModel {
  int K = 0;
  Vocabulary vocab;
  std::vector<std::vector<std::int64_t>> topic_word_counts;  // K x V
  std::vector<std::vector<std::int64_t>> doc_topic_counts;   // D x K (fit-time)
  std::vector<std::int64_t> topic_totals;                    // K, row sums
  double alpha = 0.0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  int iters = 0;

  int vocab_size() const { return vocab.size(); }

  void rebuild_totals() {
    topic_totals.assign(static_cast<std::size_t>(K), 0);
    for (int k = 0; k < K; ++k)
      for (std::int64_t c : topic_word_counts[static_cast<std::size_t>(k)])
        topic_totals[static_cast<std::size_t>(k)] += c;
  }

  // Smoothed topic-word distribution phi[k][w].
  double phi(int k, int w) const {
    return (static_cast<double>(topic_word_counts[static_cast<std::size_t>(k)][static_cast<std::size_t>(w)]) + beta) /
           (static_cast<double>(topic_totals[static_cast<std::size_t>(k)]) + vocab_size() * beta);
  }
};

namespace detail {

// Token instances of a bag-of-words doc in a fixed order (ascending term
// id, repeats adjacent), which pins the sweep order of the sampler.
inline std::vector<int> expand_tokens(const BowDoc& doc) {
  std::vector<int> words;
  words.reserve(static_cast<std::size_t>(doc.total()));
  for (const auto& [id, count] : doc.counts)
    for (int c = 0; c < count; ++c) words.push_back(id);
  return words;
}

inline int sample_discrete(const std::vector<double>& weights, double total,
                           Rng& rng) {
  double u = rng.real01() * total;
  double acc = 0.0;
  int last = static_cast<int>(weights.size()) - 1;
  for (int k = 0; k <= last; ++k) {
    acc += weights[static_cast<std::size_t>(k)];
    if (u < acc) return k;
  }
  return last;
}

}  // namespace detail

// Collapsed Gibbs sampling: iters full sweeps over all token-topic
// assignments from a seeded random initialization. Deterministic given
// (corpus, K, alpha, beta, iters, seed).
inline TopicModel lda_fit(const std::vector<BowDoc>& docs,
                          const Vocabulary& vocab, int K, double alpha,
                          double beta, int iters, std::uint64_t seed) {
  if (K < 1) throw DomainError("lda_fit: K must be >= 1");
  if (alpha <= 0.0 || beta <= 0.0)
    throw DomainError("lda_fit: priors must be positive");
  if (iters < 1) throw DomainError("lda_fit: iters must be >= 1");
  bool any = false;
  for (const auto& d : docs)
    if (d.total() > 0) any = true;
  if (!any) throw DomainError("lda_fit: corpus has no in-vocabulary tokens");

  const int V = vocab.size();
  const auto D = docs.size();

  TopicModel model;
  model.K = K;
  model.vocab = vocab;
  model.alpha = alpha;
  model.beta = beta;
  model.seed = seed;
  model.iters = iters;
  model.topic_word_counts.assign(static_cast<std::size_t>(K),
                                 std::vector<std::int64_t>(static_cast<std::size_t>(V), 0));
  model.doc_topic_counts.assign(D, std::vector<std::int64_t>(static_cast<std::size_t>(K), 0));
  model.topic_totals.assign(static_cast<std::size_t>(K), 0);

  std::vector<std::vector<int>> words(D);
  std::vector<std::vector<int>> z(D);
  Rng rng(Rng::derive(seed, "lda-fit"));
  for (std::size_t d = 0; d < D; ++d) {
    words[d] = detail::expand_tokens(docs[d]);
    z[d].resize(words[d].size());
    for (std::size_t n = 0; n < words[d].size(); ++n) {
      int k = static_cast<int>(rng.below(static_cast<std::uint64_t>(K)));
      z[d][n] = k;
      ++model.doc_topic_counts[d][static_cast<std::size_t>(k)];
      ++model.topic_word_counts[static_cast<std::size_t>(k)][static_cast<std::size_t>(words[d][n])];
      ++model.topic_totals[static_cast<std::size_t>(k)];
    }
  }

  std::vector<double> weights(static_cast<std::size_t>(K));
  const double vbeta = V * beta;
  for (int it = 0; it < iters; ++it) {
    for (std::size_t d = 0; d < D; ++d) {
      auto& ndk = model.doc_topic_counts[d];
      for (std::size_t n = 0; n < words[d].size(); ++n) {
        int w = words[d][n];
        int old = z[d][n];
        --ndk[static_cast<std::size_t>(old)];
        --model.topic_word_counts[static_cast<std::size_t>(old)][static_cast<std::size_t>(w)];
        --model.topic_totals[static_cast<std::size_t>(old)];
        double total = 0.0;
        for (int k = 0; k < K; ++k) {
          double p =
              (static_cast<double>(ndk[static_cast<std::size_t>(k)]) + alpha) *
              (static_cast<double>(model.topic_word_counts[static_cast<std::size_t>(k)][static_cast<std::size_t>(w)]) + beta) /
              (static_cast<double>(model.topic_totals[static_cast<std::size_t>(k)]) + vbeta);
          weights[static_cast<std::size_t>(k)] = p;
          total += p;
        }
        int knew = detail::sample_discrete(weights, total, rng);
        z[d][n] = knew;
        ++ndk[static_cast<std::size_t>(knew)];
        ++model.topic_word_counts[static_cast<std::size_t>(knew)][static_cast<std::size_t>(w)];
        ++model.topic_totals[static_cast<std::size_t>(knew)];
      }
    }
  }
  return model;
}

// Fold-in inference with frozen topic-word counts: theta is the mean of
// (n_dk + alpha) / (N + K*alpha) over post-burn-in sweeps. An empty doc
// returns the exact uniform prior mean.
inline SoftLabel lda_infer(const TopicModel& model, const BowDoc& doc,
                           int iters, int burn_in, std::uint64_t seed) {
  if (iters <= burn_in || burn_in < 0)
    throw DomainError("lda_infer: need iters > burn_in >= 0");
  const int K = model.K;
  SoftLabel label;
  label.theta.assign(static_cast<std::size_t>(K), 0.0);

  std::vector<int> words = detail::expand_tokens(doc);
  for (int w : words)
    if (w < 0 || w >= model.vocab_size())
      throw DomainError("lda_infer: token id outside model vocabulary");
  const auto N = words.size();
  if (N == 0) {
    for (auto& v : label.theta) v = 1.0 / K;
    return label;
  }

  Rng rng(Rng::derive(seed, "lda-infer"));
  std::vector<int> z(N);
  std::vector<std::int64_t> ndk(static_cast<std::size_t>(K), 0);
  for (std::size_t n = 0; n < N; ++n) {
    int k = static_cast<int>(rng.below(static_cast<std::uint64_t>(K)));
    z[n] = k;
    ++ndk[static_cast<std::size_t>(k)];
  }

  const double vbeta = model.vocab_size() * model.beta;
  std::vector<double> weights(static_cast<std::size_t>(K));
  std::vector<double> theta_acc(static_cast<std::size_t>(K), 0.0);
  int kept = 0;
  for (int it = 0; it < iters; ++it) {
    for (std::size_t n = 0; n < N; ++n) {
      int w = words[n];
      int old = z[n];
      --ndk[static_cast<std::size_t>(old)];
      double total = 0.0;
      for (int k = 0; k < K; ++k) {
        double p =
            (static_cast<double>(ndk[static_cast<std::size_t>(k)]) + model.alpha) *
            (static_cast<double>(model.topic_word_counts[static_cast<std::size_t>(k)][static_cast<std::size_t>(w)]) + model.beta) /
            (static_cast<double>(model.topic_totals[static_cast<std::size_t>(k)]) + vbeta);
        weights[static_cast<std::size_t>(k)] = p;
        total += p;
      }
      int knew = detail::sample_discrete(weights, total, rng);
      z[n] = knew;
      ++ndk[static_cast<std::size_t>(knew)];
    }
    if (it >= burn_in) {
      double denom = static_cast<double>(N) + K * model.alpha;
      for (int k = 0; k < K; ++k)
        theta_acc[static_cast<std::size_t>(k)] +=
            (static_cast<double>(ndk[static_cast<std::size_t>(k)]) + model.alpha) / denom;
      ++kept;
    }
  }
  double sum = 0.0;
  for (int k = 0; k < K; ++k) {
    label.theta[static_cast<std::size_t>(k)] = theta_acc[static_cast<std::size_t>(k)] / kept;
    sum += label.theta[static_cast<std::size_t>(k)];
  }
  for (auto& v : label.theta) v /= sum;
  return label;
}

inline PretextSample make_topic_sample(const GrayImage& img,
                                       const SoftLabel& theta) {
  theta.validate();
  PretextSample s;
  s.task = Task::lda_topics;
  s.inputs.push_back(img);
  s.target = theta;
  return s;
}

inline nlohmann::json topic_model_to_json(const TopicModel& model) {
  nlohmann::json j;
  j["K"] = model.K;
  j["alpha"] = model.alpha;
  j["beta"] = model.beta;
  j["seed"] = model.seed;
  j["iters"] = model.iters;
  j["vocab"] = model.vocab.terms;
  j["topic_word_counts"] = model.topic_word_counts;
  return j;
}

inline TopicModel topic_model_from_json(const nlohmann::json& j) {
  TopicModel model;
  try {
    model.K = j.at("K").get<int>();
    model.alpha = j.at("alpha").get<double>();
    model.beta = j.at("beta").get<double>();
    model.seed = j.at("seed").get<std::uint64_t>();
    model.iters = j.at("iters").get<int>();
    model.vocab.terms = j.at("vocab").get<std::vector<std::string>>();
    model.topic_word_counts =
        j.at("topic_word_counts").get<std::vector<std::vector<std::int64_t>>>();
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError(std::string("topic model: bad JSON: ") + e.what());
  }
  model.vocab.rebuild_index();
  if (static_cast<int>(model.topic_word_counts.size()) != model.K)
    throw DecodeError("topic model: K != topic_word_counts rows");
  for (const auto& row : model.topic_word_counts)
    if (static_cast<int>(row.size()) != model.vocab.size())
      throw DecodeError("topic model: vocab size != topic_word_counts cols");
  model.rebuild_totals();
  return model;
}

}  // namespace docpretext

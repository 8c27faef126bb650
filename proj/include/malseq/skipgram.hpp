#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "malseq/error.hpp"
#include "malseq/rng.hpp"
#include "malseq/vocab.hpp"

namespace malseq {

// Row i is the distributed representation of API i.
struct EmbeddingMatrix {
  std::uint32_t l = 0;  // vocabulary size
  std::uint32_t v = 0;  // embedding dimension
  std::vector<double> w;  // row-major l x v

  double* row(std::uint32_t i) { return w.data() + static_cast<std::size_t>(i) * v; }
  const double* row(std::uint32_t i) const { return w.data() + static_cast<std::size_t>(i) * v; }
};

struct SkipGramConfig {
  std::uint32_t dim = 200;
  std::uint32_t window = 5;
  std::uint32_t negatives = 5;
  std::uint32_t epochs = 5;
  double lr = 0.025;
  std::uint64_t seed = 42;
};

struct SkipGramResult {
  EmbeddingMatrix embedding;
  std::vector<double> epoch_loss;  // mean pair loss per epoch
};

// Skip-gram with negative sampling over (center, context) pairs within the
// window of every sequence. Filtered vocabulary entries are dropped before
// pairing. Single-threaded; fully determined by the seed.
inline SkipGramResult train_skipgram(const std::vector<std::vector<std::string>>& corpus,
                                     const ApiVocab& vocab, const SkipGramConfig& config) {
  if (config.dim == 0) raise(errc::zero_dimension, "embedding dimension must be positive");

  std::vector<std::vector<std::uint32_t>> sequences;
  sequences.reserve(corpus.size());
  std::vector<std::uint64_t> counts(vocab.size(), 0);
  std::uint64_t positions = 0;
  for (const auto& apis : corpus) {
    std::vector<std::uint32_t> ids;
    ids.reserve(apis.size());
    for (const auto& api : apis) {
      auto idx = vocab.lookup(api);
      if (!idx || vocab.filtered[*idx]) continue;
      ids.push_back(*idx);
      ++counts[*idx];
    }
    positions += ids.size();
    if (!ids.empty()) sequences.push_back(std::move(ids));
  }
  if (sequences.empty()) {
    raise(errc::empty_corpus, "no trainable sequences after filtering");
  }

  const std::uint32_t l = vocab.size();
  const std::uint32_t v = config.dim;

  // unigram^0.75 negative-sampling distribution
  std::vector<double> cumulative(l, 0.0);
  double acc = 0.0;
  for (std::uint32_t i = 0; i < l; ++i) {
    acc += std::pow(static_cast<double>(counts[i]), 0.75);
    cumulative[i] = acc;
  }
  auto sample_negative = [&](Rng& rng) -> std::uint32_t {
    double u = rng.uniform() * acc;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) --it;
    return static_cast<std::uint32_t>(it - cumulative.begin());
  };

  Rng rng(config.seed);
  EmbeddingMatrix emb;
  emb.l = l;
  emb.v = v;
  emb.w.resize(static_cast<std::size_t>(l) * v);
  for (auto& x : emb.w) x = (rng.uniform() - 0.5) / v;
  std::vector<double> ctx(static_cast<std::size_t>(l) * v, 0.0);

  auto sigmoid = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };

  const double total_positions =
      static_cast<double>(positions) * std::max<std::uint32_t>(config.epochs, 1);
  const double min_lr = config.lr * 1e-4;
  std::uint64_t processed = 0;

  SkipGramResult result;
  std::vector<double> grad_center(v);

  for (std::uint32_t epoch = 0; epoch < config.epochs; ++epoch) {
    double loss_sum = 0.0;
    std::uint64_t pair_count = 0;
    for (const auto& ids : sequences) {
      const std::size_t len = ids.size();
      for (std::size_t i = 0; i < len; ++i, ++processed) {
        double lr = config.lr * (1.0 - static_cast<double>(processed) / total_positions);
        lr = std::max(lr, min_lr);
        const std::uint32_t center = ids[i];
        double* wc = emb.row(center);
        const std::size_t lo = i >= config.window ? i - config.window : 0;
        const std::size_t hi = std::min(len - 1, i + config.window);
        for (std::size_t j = lo; j <= hi; ++j) {
          if (j == i) continue;
          std::fill(grad_center.begin(), grad_center.end(), 0.0);
          double pair_loss = 0.0;
          for (std::uint32_t neg = 0; neg <= config.negatives; ++neg) {
            std::uint32_t target;
            double label;
            if (neg == 0) {
              target = ids[j];
              label = 1.0;
            } else {
              target = sample_negative(rng);
              if (target == ids[j]) continue;
              label = 0.0;
            }
            double* ct = ctx.data() + static_cast<std::size_t>(target) * v;
            double dot = 0.0;
            for (std::uint32_t d = 0; d < v; ++d) dot += wc[d] * ct[d];
            double pred = sigmoid(dot);
            pair_loss += label > 0.5 ? -std::log(std::max(pred, 1e-12))
                                     : -std::log(std::max(1.0 - pred, 1e-12));
            double g = (label - pred) * lr;
            for (std::uint32_t d = 0; d < v; ++d) {
              grad_center[d] += g * ct[d];
              ct[d] += g * wc[d];
            }
          }
          for (std::uint32_t d = 0; d < v; ++d) wc[d] += grad_center[d];
          loss_sum += pair_loss;
          ++pair_count;
        }
      }
    }
    result.epoch_loss.push_back(pair_count ? loss_sum / static_cast<double>(pair_count) : 0.0);
  }

  result.embedding = std::move(emb);
  return result;
}

}  // namespace malseq

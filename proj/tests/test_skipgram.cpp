#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "malseq/rng.hpp"
#include "malseq/skipgram.hpp"

using namespace malseq;

namespace {

double cosine(const EmbeddingMatrix& emb, std::uint32_t a, std::uint32_t b) {
  double dot = 0, na = 0, nb = 0;
  for (std::uint32_t d = 0; d < emb.v; ++d) {
    dot += emb.row(a)[d] * emb.row(b)[d];
    na += emb.row(a)[d] * emb.row(a)[d];
    nb += emb.row(b)[d] * emb.row(b)[d];
  }
  return dot / (std::sqrt(na) * std::sqrt(nb) + 1e-12);
}

// A and B always appear adjacent inside their own filler neighbourhood; C
// lives in a disjoint neighbourhood, so A/B share context distributions and
// A/C share none.
std::vector<std::vector<std::string>> coupled_corpus(Rng& rng) {
  std::vector<std::string> near = {"f0", "f1", "f2"};
  std::vector<std::string> far = {"g0", "g1", "g2"};
  std::vector<std::vector<std::string>> corpus;
  for (int s = 0; s < 120; ++s) {
    std::vector<std::string> seq;
    bool use_ab = s % 2 == 0;
    const auto& fillers = use_ab ? near : far;
    for (int i = 0; i < 12; ++i) {
      seq.push_back(fillers[rng.uniform_int(fillers.size())]);
      if (i % 3 == 1) {
        if (use_ab) {
          seq.push_back("A");
          seq.push_back("B");
        } else {
          seq.push_back("C");
        }
      }
    }
    corpus.push_back(std::move(seq));
  }
  return corpus;
}

ApiVocab vocab_of(const std::vector<std::vector<std::string>>& corpus) {
  std::vector<Label> labels(corpus.size(), Label::Benign);
  labels[0] = Label::Malicious;  // stats need both classes only for fractions
  return build_vocab(api_frequency_stats(corpus, labels), 2.0);  // no filtering
}

}  // namespace

TEST_CASE("embedding rows have the configured dimension and stay finite") {
  Rng rng(11);
  auto corpus = coupled_corpus(rng);
  auto vocab = vocab_of(corpus);
  SkipGramConfig cfg;
  cfg.dim = 16;
  cfg.epochs = 2;
  auto result = train_skipgram(corpus, vocab, cfg);
  CHECK(result.embedding.l == vocab.size());
  CHECK(result.embedding.v == 16);
  for (double x : result.embedding.w) CHECK(std::isfinite(x));
}

TEST_CASE("co-occurring apis end up closer than unrelated ones") {
  Rng rng(12);
  auto corpus = coupled_corpus(rng);
  auto vocab = vocab_of(corpus);
  SkipGramConfig cfg;
  cfg.dim = 24;
  cfg.window = 2;
  cfg.epochs = 12;
  cfg.seed = 99;
  auto result = train_skipgram(corpus, vocab, cfg);
  double ab = cosine(result.embedding, *vocab.lookup("A"), *vocab.lookup("B"));
  double ac = cosine(result.embedding, *vocab.lookup("A"), *vocab.lookup("C"));
  CHECK(ab > ac);
  CHECK(ab - ac > 0.2);
}

TEST_CASE("epoch loss decreases over the first epochs") {
  Rng rng(13);
  auto corpus = coupled_corpus(rng);
  auto vocab = vocab_of(corpus);
  SkipGramConfig cfg;
  cfg.dim = 16;
  cfg.epochs = 5;
  cfg.window = 2;
  cfg.lr = 0.01;
  auto result = train_skipgram(corpus, vocab, cfg);
  REQUIRE(result.epoch_loss.size() == 5);
  for (std::size_t e = 1; e < result.epoch_loss.size(); ++e) {
    CHECK(result.epoch_loss[e] < result.epoch_loss[e - 1] + 1e-6);
  }
  CHECK(result.epoch_loss.back() < result.epoch_loss.front());
}

TEST_CASE("training is deterministic under a fixed seed") {
  Rng rng(14);
  auto corpus = coupled_corpus(rng);
  auto vocab = vocab_of(corpus);
  SkipGramConfig cfg;
  cfg.dim = 8;
  cfg.epochs = 2;
  auto a = train_skipgram(corpus, vocab, cfg);
  auto b = train_skipgram(corpus, vocab, cfg);
  CHECK(a.embedding.w == b.embedding.w);

  cfg.seed = 1234;
  auto c = train_skipgram(corpus, vocab, cfg);
  CHECK(a.embedding.w != c.embedding.w);
}

TEST_CASE("degenerate inputs are rejected") {
  std::vector<std::vector<std::string>> corpus;
  ApiVocab vocab;
  SkipGramConfig cfg;
  CHECK_THROWS_AS(train_skipgram(corpus, vocab, cfg), Error);

  corpus = {{"A"}};
  std::map<std::string, ApiFrequency> stats = {{"A", {1, 1, 1}}};
  vocab = build_vocab(stats, 2.0);
  cfg.dim = 0;
  CHECK_THROWS_AS(train_skipgram(corpus, vocab, cfg), Error);
}

TEST_CASE("filtered apis are excluded from training sequences") {
  std::vector<std::vector<std::string>> corpus = {{"keep", "drop", "keep"}, {"drop"}};
  std::map<std::string, ApiFrequency> stats = {
      {"keep", {0.1, 0.1, 0.1}},
      {"drop", {0.9, 0.9, 0.9}},
  };
  auto vocab = build_vocab(stats, 0.75);
  REQUIRE(vocab.filtered[*vocab.lookup("drop")]);
  SkipGramConfig cfg;
  cfg.dim = 4;
  cfg.epochs = 1;
  // the second sequence is empty after filtering; the first has no pairs
  // within any window once 'drop' is gone, which is still trainable input
  auto result = train_skipgram(corpus, vocab, cfg);
  CHECK(result.embedding.l == 2);
}

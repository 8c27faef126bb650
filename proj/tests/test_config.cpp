#include <catch2/catch_amalgamated.hpp>

#include "malseq/config.hpp"

using namespace malseq;

TEST_CASE("defaults match the documented module defaults") {
  PipelineConfig cfg;
  CHECK(cfg.seed == 42);
  CHECK(cfg.extraction.max_len == 200000);
  CHECK(cfg.extraction.memo_cap == 50000);
  CHECK(cfg.vocab_threshold == 0.75);
  CHECK(cfg.filter_rule == FilterRule::AllClasses);
  CHECK(cfg.skipgram.dim == 200);
  CHECK(cfg.skipgram.window == 5);
  CHECK(cfg.skipgram.negatives == 5);
  CHECK(cfg.skipgram.epochs == 5);
  CHECK(cfg.skipgram.lr == 0.025);
  CHECK(cfg.hidden == 128);
  CHECK(cfg.classifier.batch == 16);
  CHECK(cfg.classifier.lr == 1e-3);
  CHECK(cfg.k == 200);
  CHECK(cfg.top_n == 9);
  CHECK(cfg.corpus_count == 2000);
  CHECK(cfg.corpus.min_methods == 20);
  CHECK(cfg.corpus.max_methods == 60);
  CHECK(cfg.split_ratios == std::array<double, 3>{0.8, 0.1, 0.1});
}

TEST_CASE("config files override defaults") {
  PipelineConfig cfg;
  apply_config_text(cfg, R"(
# pipeline settings
seed = 7

[paths]
model_dir = "artifacts/models"

[skipgram]
dim = 32
lr = 0.05

[classifier]
hidden = 24
epochs = 9

[localization]
k = 50
top_n = 5

[vocab]
threshold = 0.6
filter_all_classes = false

[output]
format = "json"
skip_errors = true
)");
  CHECK(cfg.seed == 7);
  CHECK(cfg.model_dir == "artifacts/models");
  CHECK(cfg.skipgram.dim == 32);
  CHECK(cfg.skipgram.lr == 0.05);
  CHECK(cfg.hidden == 24);
  CHECK(cfg.classifier.epochs == 9);
  CHECK(cfg.k == 50);
  CHECK(cfg.top_n == 5);
  CHECK(cfg.vocab_threshold == 0.6);
  CHECK(cfg.filter_rule == FilterRule::AnyClass);
  CHECK(cfg.format == "json");
  CHECK(cfg.skip_errors);
}

TEST_CASE("unknown keys and bad values are rejected") {
  PipelineConfig cfg;
  CHECK_THROWS_AS(apply_config_text(cfg, "mystery = 1\n"), Error);
  CHECK_THROWS_AS(apply_config_text(cfg, "[skipgram]\ndim = many\n"), Error);
  CHECK_THROWS_AS(apply_config_text(cfg, "[output]\nformat = \"xml\"\n"), Error);
  CHECK_THROWS_AS(apply_config_text(cfg, "[broken\nseed = 1\n"), Error);
  CHECK_THROWS_AS(apply_config_text(cfg, "seed\n"), Error);
}

TEST_CASE("seed streams are distinct and stable") {
  CHECK(stream_seed(42, SeedStream::Corpus) != stream_seed(42, SeedStream::SkipGram));
  CHECK(stream_seed(42, SeedStream::Corpus) == stream_seed(42, SeedStream::Corpus));
  CHECK(stream_seed(42, SeedStream::Corpus) != stream_seed(43, SeedStream::Corpus));
}

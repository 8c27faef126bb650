#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

#include "malseq/metrics.hpp"

using namespace malseq;

namespace {

PredictionOutcome outcome(Label truth, Label predicted) {
  static int id = 0;
  return PredictionOutcome{"s" + std::to_string(id++), truth, predicted};
}

}  // namespace

TEST_CASE("confusion counts and derived rates") {
  std::vector<PredictionOutcome> preds = {
      outcome(Label::Malicious, Label::Malicious),
      outcome(Label::Malicious, Label::Malicious),
      outcome(Label::Benign, Label::Malicious),
      outcome(Label::Benign, Label::Benign),
  };
  auto m = compute_metrics(preds);
  CHECK(m.tp == 2);
  CHECK(m.fp == 1);
  CHECK(m.fn == 0);
  CHECK(m.tn == 1);
  CHECK(m.precision == Catch::Approx(2.0 / 3.0));
  CHECK(m.recall == Catch::Approx(1.0));
  CHECK(m.f1 == Catch::Approx(0.8));
  CHECK(m.fpr == Catch::Approx(0.5));
  CHECK(m.accuracy == Catch::Approx(0.75));
}

TEST_CASE("f1 equals precision when precision equals recall") {
  std::vector<PredictionOutcome> preds = {
      outcome(Label::Malicious, Label::Malicious),
      outcome(Label::Malicious, Label::Benign),
      outcome(Label::Benign, Label::Malicious),
      outcome(Label::Benign, Label::Benign),
  };
  auto m = compute_metrics(preds);
  CHECK(m.precision == Catch::Approx(m.recall));
  CHECK(m.f1 == Catch::Approx(m.precision));
}

TEST_CASE("metrics are permutation invariant") {
  std::vector<PredictionOutcome> preds;
  for (int i = 0; i < 20; ++i) {
    preds.push_back(outcome(i % 3 ? Label::Benign : Label::Malicious,
                            i % 2 ? Label::Benign : Label::Malicious));
  }
  auto before = compute_metrics(preds);
  std::reverse(preds.begin(), preds.end());
  auto after = compute_metrics(preds);
  CHECK(before.accuracy == after.accuracy);
  CHECK(before.f1 == after.f1);
  CHECK(before.fpr == after.fpr);
}

TEST_CASE("empty prediction lists are rejected") {
  CHECK_THROWS_AS(compute_metrics({}), Error);
}

TEST_CASE("localization metrics follow the hit and accuracy definitions") {
  std::map<std::string, std::vector<std::string>> reports = {
      {"a", {"m1", "m2", "m3"}},
      {"b", {"m4"}},
  };
  std::map<std::string, std::set<std::string>> truth = {
      {"a", {"m1", "m2", "m3", "m9"}},
      {"b", {"m5"}},
  };
  auto m = localization_metrics(reports, truth, 9);
  CHECK(m.N == 2);
  CHECK(m.N_hit == 1);
  CHECK(m.hit_rate == Catch::Approx(0.5));
  CHECK(m.accuracy == Catch::Approx(3.0 / 18.0));
}

TEST_CASE("perfect reports score accuracy one") {
  std::map<std::string, std::vector<std::string>> reports = {{"a", {"m1", "m2"}}};
  std::map<std::string, std::set<std::string>> truth = {{"a", {"m1", "m2"}}};
  auto m = localization_metrics(reports, truth, 2);
  CHECK(m.hit_rate == Catch::Approx(1.0));
  CHECK(m.accuracy == Catch::Approx(1.0));
}

TEST_CASE("misaligned sample sets are rejected") {
  std::map<std::string, std::vector<std::string>> reports = {{"a", {"m1"}}};
  std::map<std::string, std::set<std::string>> truth = {{"b", {"m1"}}};
  CHECK_THROWS_AS(localization_metrics(reports, truth, 1), Error);

  truth = {{"a", {"m1"}}, {"b", {"m2"}}};
  CHECK_THROWS_AS(localization_metrics(reports, truth, 1), Error);
}

TEST_CASE("hit rate never drops as n grows") {
  std::map<std::string, std::vector<std::string>> full = {
      {"a", {"x", "m1", "y", "z"}},
      {"b", {"x", "y", "z", "m2"}},
      {"c", {"x", "y", "z", "w"}},
  };
  std::map<std::string, std::set<std::string>> truth = {
      {"a", {"m1"}}, {"b", {"m2"}}, {"c", {"m3"}}};
  double last = 0.0;
  for (std::uint32_t n = 1; n <= 4; ++n) {
    std::map<std::string, std::vector<std::string>> cut;
    for (const auto& [id, sigs] : full) {
      cut[id] = std::vector<std::string>(sigs.begin(), sigs.begin() + n);
    }
    auto m = localization_metrics(cut, truth, n);
    CHECK(m.hit_rate >= last);
    last = m.hit_rate;
  }
}

TEST_CASE("splits are stratified, disjoint and exhaustive") {
  std::vector<Label> labels;
  for (int i = 0; i < 100; ++i) {
    labels.push_back(i < 40 ? Label::Malicious : Label::Benign);
  }
  auto parts = split_dataset(labels, {0.8, 0.1, 0.1}, 7);
  CHECK(parts[0].size() == 80);
  CHECK(parts[1].size() == 10);
  CHECK(parts[2].size() == 10);

  std::set<std::size_t> seen;
  std::array<std::array<int, 2>, 3> class_counts{};
  for (int s = 0; s < 3; ++s) {
    for (std::size_t i : parts[s]) {
      CHECK(seen.insert(i).second);
      class_counts[s][labels[i] == Label::Malicious ? 0 : 1] += 1;
    }
  }
  CHECK(seen.size() == labels.size());
  CHECK(class_counts[0][0] == 32);
  CHECK(class_counts[1][0] == 4);
  CHECK(class_counts[2][0] == 4);

  auto again = split_dataset(labels, {0.8, 0.1, 0.1}, 7);
  CHECK(parts == again);
  auto other = split_dataset(labels, {0.8, 0.1, 0.1}, 8);
  CHECK(parts != other);
}

TEST_CASE("bad ratios are rejected") {
  std::vector<Label> labels = {Label::Malicious, Label::Benign};
  CHECK_THROWS_AS(split_dataset(labels, {0.5, 0.6, 0.1}, 1), Error);
  CHECK_THROWS_AS(split_dataset(labels, {1.2, -0.1, -0.1}, 1), Error);
}

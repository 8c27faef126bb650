#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "malseq/dex_types.hpp"
#include "malseq/error.hpp"
#include "malseq/rng.hpp"

namespace malseq {

struct PredictionOutcome {
  std::string id;
  Label truth = Label::Benign;
  Label predicted = Label::Benign;
};

struct EvalMetrics {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double fpr = 0.0;
};

// Malicious is the positive class.
inline EvalMetrics compute_metrics(const std::vector<PredictionOutcome>& predictions) {
  if (predictions.empty()) raise(errc::empty_predictions, "no predictions to score");
  EvalMetrics m;
  for (const auto& p : predictions) {
    const bool pos = p.predicted == Label::Malicious;
    const bool truth = p.truth == Label::Malicious;
    if (pos && truth) ++m.tp;
    else if (pos && !truth) ++m.fp;
    else if (!pos && truth) ++m.fn;
    else ++m.tn;
  }
  const double total = static_cast<double>(predictions.size());
  m.accuracy = static_cast<double>(m.tp + m.tn) / total;
  m.precision = (m.tp + m.fp) ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp) : 0.0;
  m.recall = (m.tp + m.fn) ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn) : 0.0;
  m.f1 = (m.precision + m.recall) > 0.0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  m.fpr = (m.fp + m.tn) ? static_cast<double>(m.fp) / static_cast<double>(m.fp + m.tn) : 0.0;
  return m;
}

struct LocalizationMetrics {
  std::size_t N = 0;
  std::size_t N_hit = 0;
  std::vector<std::size_t> per_sample_correct;  // n'_i, in id order
  std::uint32_t n = 0;
  double hit_rate = 0.0;
  double accuracy = 0.0;
};

// reports: per sample, the top-n reported method signatures; truth: the
// planted ground-truth methods. Samples must align exactly by id.
inline LocalizationMetrics localization_metrics(
    const std::map<std::string, std::vector<std::string>>& reports,
    const std::map<std::string, std::set<std::string>>& truth, std::uint32_t n) {
  if (reports.size() != truth.size()) {
    raise(errc::misaligned_sets, "report and truth sample sets differ in size");
  }
  LocalizationMetrics m;
  m.n = n;
  for (const auto& [id, methods] : reports) {
    auto it = truth.find(id);
    if (it == truth.end()) {
      raise(errc::misaligned_sets, "no ground truth for sample '" + id + "'");
    }
    std::size_t correct = 0;
    for (const auto& sig : methods) {
      if (it->second.count(sig)) ++correct;
    }
    m.per_sample_correct.push_back(correct);
    if (correct >= 1) ++m.N_hit;
  }
  m.N = reports.size();
  if (m.N > 0 && n > 0) {
    m.hit_rate = static_cast<double>(m.N_hit) / static_cast<double>(m.N);
    const std::size_t sum =
        std::accumulate(m.per_sample_correct.begin(), m.per_sample_correct.end(), std::size_t{0});
    m.accuracy = static_cast<double>(sum) / (static_cast<double>(m.N) * static_cast<double>(n));
  }
  return m;
}

// Stratified split by label; deterministic for a fixed seed. Returns index
// lists (train, validation, test) that are disjoint and exhaustive.
inline std::array<std::vector<std::size_t>, 3> split_dataset(const std::vector<Label>& labels,
                                                             std::array<double, 3> ratios,
                                                             std::uint64_t seed) {
  double sum = ratios[0] + ratios[1] + ratios[2];
  if (std::abs(sum - 1.0) > 1e-9 || ratios[0] < 0 || ratios[1] < 0 || ratios[2] < 0) {
    raise(errc::bad_ratios, "split ratios must be non-negative and sum to 1");
  }
  std::array<std::vector<std::size_t>, 3> out;
  for (int cls = 0; cls < 2; ++cls) {
    const Label want = cls == 0 ? Label::Malicious : Label::Benign;
    std::vector<std::size_t> indices;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == want) indices.push_back(i);
    }
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(cls)));
    for (std::size_t i = indices.size(); i > 1; --i) {
      std::swap(indices[i - 1], indices[rng.uniform_int(static_cast<std::uint64_t>(i))]);
    }
    // largest-remainder allocation keeps the three parts exhaustive
    const std::size_t n = indices.size();
    std::array<std::size_t, 3> take{};
    std::array<double, 3> frac{};
    std::size_t assigned = 0;
    for (int s = 0; s < 3; ++s) {
      double exact = ratios[s] * static_cast<double>(n);
      take[s] = static_cast<std::size_t>(exact);
      frac[s] = exact - static_cast<double>(take[s]);
      assigned += take[s];
    }
    std::array<int, 3> order = {0, 1, 2};
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (frac[a] != frac[b]) return frac[a] > frac[b];
      return a < b;
    });
    for (std::size_t r = 0; r < n - assigned; ++r) take[order[r % 3]] += 1;
    std::size_t pos = 0;
    for (int s = 0; s < 3; ++s) {
      for (std::size_t i = 0; i < take[s]; ++i) out[s].push_back(indices[pos++]);
    }
  }
  for (auto& part : out) std::sort(part.begin(), part.end());
  return out;
}

}  // namespace malseq

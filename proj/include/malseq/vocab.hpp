#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "malseq/dex_types.hpp"
#include "malseq/error.hpp"

namespace malseq {

// Fractions of programs (not occurrences) containing an API, per class and
// overall.
struct ApiFrequency {
  double malicious = 0.0;
  double benign = 0.0;
  double all = 0.0;
};

enum class FilterRule {
  AllClasses,  // filtered when above threshold in malicious AND benign AND all
  AnyClass,
};

struct ApiVocab {
  std::vector<std::string> api_of;  // dense indices [0, l)
  std::vector<ApiFrequency> freq;
  std::vector<bool> filtered;
  std::unordered_map<std::string, std::uint32_t> index;

  std::uint32_t size() const { return static_cast<std::uint32_t>(api_of.size()); }

  std::optional<std::uint32_t> lookup(const std::string& api) const {
    auto it = index.find(api);
    if (it == index.end()) return std::nullopt;
    return it->second;
  }
};

// Per-API presence fractions over a labeled corpus. api_lists and labels are
// parallel arrays, one entry per program.
inline std::map<std::string, ApiFrequency> api_frequency_stats(
    const std::vector<std::vector<std::string>>& api_lists, const std::vector<Label>& labels) {
  if (api_lists.empty() || api_lists.size() != labels.size()) {
    raise(errc::empty_corpus, "frequency stats need a non-empty labeled corpus");
  }
  std::size_t n_mal = 0, n_ben = 0;
  std::map<std::string, std::array<std::size_t, 2>> presence;  // {malicious, benign}
  for (std::size_t i = 0; i < api_lists.size(); ++i) {
    (labels[i] == Label::Malicious ? n_mal : n_ben) += 1;
    std::set<std::string> distinct(api_lists[i].begin(), api_lists[i].end());
    for (const auto& api : distinct) {
      auto& counts = presence[api];
      counts[labels[i] == Label::Malicious ? 0 : 1] += 1;
    }
  }
  const double total = static_cast<double>(api_lists.size());
  std::map<std::string, ApiFrequency> stats;
  for (const auto& [api, counts] : presence) {
    ApiFrequency f;
    f.malicious = n_mal ? static_cast<double>(counts[0]) / static_cast<double>(n_mal) : 0.0;
    f.benign = n_ben ? static_cast<double>(counts[1]) / static_cast<double>(n_ben) : 0.0;
    f.all = static_cast<double>(counts[0] + counts[1]) / total;
    stats.emplace(api, f);
  }
  return stats;
}

// Indexes every observed API in signature order. Filtered APIs keep their
// indices and are dropped from sequences at vectorization time.
inline ApiVocab build_vocab(const std::map<std::string, ApiFrequency>& stats, double threshold,
                            FilterRule rule = FilterRule::AllClasses) {
  ApiVocab vocab;
  vocab.api_of.reserve(stats.size());
  for (const auto& [api, f] : stats) {
    std::uint32_t idx = static_cast<std::uint32_t>(vocab.api_of.size());
    vocab.api_of.push_back(api);
    vocab.freq.push_back(f);
    bool over_mal = f.malicious > threshold;
    bool over_ben = f.benign > threshold;
    bool over_all = f.all > threshold;
    vocab.filtered.push_back(rule == FilterRule::AllClasses ? (over_mal && over_ben && over_all)
                                                            : (over_mal || over_ben || over_all));
    vocab.index.emplace(api, idx);
  }
  return vocab;
}

}  // namespace malseq

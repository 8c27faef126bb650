#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "malseq/bilstm.hpp"
#include "malseq/dex_types.hpp"
#include "malseq/error.hpp"
#include "malseq/extraction.hpp"

namespace malseq {

struct SuspectApi {
  std::uint32_t position = 0;  // index into the behavior sequence
  std::string api;
  double alpha = 0.0;
  std::uint32_t direct_invoker = 0;  // method def index
  std::uint32_t root = 0;            // entry root method def index
};

struct MethodSuspicion {
  std::uint32_t method = 0;
  std::string signature;
  double sus = 0.0;
  std::vector<std::uint32_t> contributing;  // suspect positions, ascending
  std::vector<std::uint32_t> entry_points;  // distinct roots, ascending
};

// The k valid positions with the largest attention weights, joined to their
// provenance. Ties break toward the earlier position.
inline std::vector<SuspectApi> top_k_suspects(const AttentionTrace& trace,
                                              const BehaviorSequence& seq, std::uint32_t k) {
  if (trace.position_map.size() != trace.valid_len ||
      seq.provenance.size() != seq.apis.size()) {
    raise(errc::provenance_mismatch, "trace and sequence shapes disagree");
  }
  for (std::uint32_t orig : trace.position_map) {
    if (orig >= seq.apis.size()) {
      raise(errc::provenance_mismatch,
            "trace position " + std::to_string(orig) + " outside the sequence");
    }
  }

  std::vector<SuspectApi> all;
  all.reserve(trace.valid_len);
  for (std::uint32_t t = 0; t < trace.valid_len; ++t) {
    const std::uint32_t orig = trace.position_map[t];
    SuspectApi s;
    s.position = orig;
    s.api = seq.apis[orig];
    s.alpha = trace.alpha[t];
    s.direct_invoker = seq.provenance[orig].direct_invoker;
    s.root = seq.provenance[orig].root;
    all.push_back(std::move(s));
  }
  std::stable_sort(all.begin(), all.end(), [](const SuspectApi& a, const SuspectApi& b) {
    if (a.alpha != b.alpha) return a.alpha > b.alpha;
    return a.position < b.position;
  });
  if (all.size() > k) all.resize(k);
  return all;
}

// Groups suspect positions by their direct invoker; a method's score is the
// plain sum of its suspects' attention weights.
inline std::vector<MethodSuspicion> suspect_scores(const std::vector<SuspectApi>& suspects,
                                                   const DexProgram& program) {
  std::map<std::uint32_t, MethodSuspicion> by_method;
  std::map<std::uint32_t, std::set<std::uint32_t>> roots;
  for (const SuspectApi& s : suspects) {
    auto& m = by_method[s.direct_invoker];
    m.method = s.direct_invoker;
    m.sus += s.alpha;
    m.contributing.push_back(s.position);
    roots[s.direct_invoker].insert(s.root);
  }
  std::vector<MethodSuspicion> out;
  out.reserve(by_method.size());
  for (auto& [method, m] : by_method) {
    m.signature = program.method_signature(method);
    std::sort(m.contributing.begin(), m.contributing.end());
    m.entry_points.assign(roots[method].begin(), roots[method].end());
    out.push_back(std::move(m));
  }
  std::sort(out.begin(), out.end(), [](const MethodSuspicion& a, const MethodSuspicion& b) {
    if (a.sus != b.sus) return a.sus > b.sus;
    return a.signature < b.signature;
  });
  return out;
}

inline std::vector<MethodSuspicion> select_methods(const std::vector<MethodSuspicion>& scores,
                                                   std::uint32_t n) {
  std::vector<MethodSuspicion> out = scores;
  std::sort(out.begin(), out.end(), [](const MethodSuspicion& a, const MethodSuspicion& b) {
    if (a.sus != b.sus) return a.sus > b.sus;
    return a.signature < b.signature;
  });
  if (out.size() > n) out.resize(n);
  return out;
}

struct NMaxApi {
  std::string api;
  double suspected_rate = 0.0;  // fraction of programs whose k-suspect set has it
  double average_weight = 0.0;  // mean alpha over its suspect occurrences
};

// Cross-program view: the n most frequently k-suspected APIs.
inline std::vector<NMaxApi> n_max_apis(
    const std::vector<std::pair<const AttentionTrace*, const BehaviorSequence*>>& programs,
    std::uint32_t k, std::uint32_t n) {
  if (programs.empty()) raise(errc::empty_set, "n-max statistics need at least one program");
  struct Acc {
    std::size_t program_count = 0;
    double weight_sum = 0.0;
    std::size_t occurrences = 0;
  };
  std::map<std::string, Acc> acc;
  for (const auto& [trace, seq] : programs) {
    auto suspects = top_k_suspects(*trace, *seq, k);
    std::set<std::string> seen;
    for (const auto& s : suspects) {
      auto& a = acc[s.api];
      a.weight_sum += s.alpha;
      a.occurrences += 1;
      if (seen.insert(s.api).second) a.program_count += 1;
    }
  }
  std::vector<NMaxApi> out;
  out.reserve(acc.size());
  for (const auto& [api, a] : acc) {
    NMaxApi e;
    e.api = api;
    e.suspected_rate = static_cast<double>(a.program_count) / static_cast<double>(programs.size());
    e.average_weight = a.occurrences ? a.weight_sum / static_cast<double>(a.occurrences) : 0.0;
    out.push_back(std::move(e));
  }
  std::sort(out.begin(), out.end(), [](const NMaxApi& a, const NMaxApi& b) {
    if (a.suspected_rate != b.suspected_rate) return a.suspected_rate > b.suspected_rate;
    if (a.average_weight != b.average_weight) return a.average_weight > b.average_weight;
    return a.api < b.api;
  });
  if (out.size() > n) out.resize(n);
  return out;
}

}  // namespace malseq

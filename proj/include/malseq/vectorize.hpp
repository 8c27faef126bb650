#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "malseq/extraction.hpp"
#include "malseq/skipgram.hpp"
#include "malseq/vocab.hpp"

namespace malseq {

// Fixed-size classifier input: embedded rows for the surviving APIs, then
// zero padding up to L. position_map joins vectorized positions back to the
// original sequence for provenance lookups.
struct PaddedVectorSequence {
  std::uint32_t L = 0;
  std::uint32_t v = 0;
  std::uint32_t valid_len = 0;
  std::vector<double> data;  // L x v row-major; rows >= valid_len all zero
  std::vector<std::uint32_t> position_map;  // size valid_len; original indices

  double* row(std::uint32_t i) { return data.data() + static_cast<std::size_t>(i) * v; }
  const double* row(std::uint32_t i) const {
    return data.data() + static_cast<std::size_t>(i) * v;
  }
};

// Filtered APIs are removed; unseen APIs stay as zero-vector positions (UNK,
// identical to padding); sequences longer than L are truncated.
inline PaddedVectorSequence vectorize(const std::vector<std::string>& apis, const ApiVocab& vocab,
                                      const EmbeddingMatrix& emb, std::uint32_t L) {
  PaddedVectorSequence out;
  out.L = L;
  out.v = emb.v;
  out.data.assign(static_cast<std::size_t>(L) * emb.v, 0.0);
  for (std::uint32_t i = 0; i < apis.size(); ++i) {
    if (out.valid_len >= L) break;
    auto idx = vocab.lookup(apis[i]);
    if (idx && vocab.filtered[*idx]) continue;
    if (idx) {
      std::memcpy(out.row(out.valid_len), emb.row(*idx), sizeof(double) * emb.v);
    }
    out.position_map.push_back(i);
    ++out.valid_len;
  }
  return out;
}

inline PaddedVectorSequence vectorize(const BehaviorSequence& seq, const ApiVocab& vocab,
                                      const EmbeddingMatrix& emb, std::uint32_t L) {
  return vectorize(seq.apis, vocab, emb, L);
}

}  // namespace malseq

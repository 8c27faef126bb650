#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "malseq/call_graph.hpp"
#include "malseq/dex_types.hpp"

namespace malseq {

struct ExtractionConfig {
  std::size_t max_len = 200000;   // emitted APIs before truncation
  std::size_t memo_cap = 50000;   // largest per-method subsequence kept in the memo
};

struct Provenance {
  std::uint32_t direct_invoker = 0;     // internal method def index
  std::uint32_t root = 0;               // root method def index
  std::uint32_t instruction_offset = 0; // code-unit offset of the invoke

  bool operator==(const Provenance&) const = default;
};

struct SubsequenceSpan {
  std::uint32_t root = 0;
  std::size_t start = 0;
  std::size_t end = 0;
};

struct BehaviorSequence {
  std::vector<std::string> apis;  // full signatures, vocab-independent
  std::vector<Provenance> provenance;
  std::vector<SubsequenceSpan> subsequence_bounds;
  bool truncated = false;

  std::size_t size() const { return apis.size(); }
};

struct TraversalStats {
  std::size_t n = 0;        // internal method count
  double n_avg = 0.0;       // mean internal call sites per method
  double d = 0.0;           // mean invocation depth over emissions
  std::size_t memo_hits = 0;
  std::size_t emitted_len = 0;
};

namespace extdetail {

struct Emit {
  std::uint32_t ref;      // method_ref index of the API
  std::uint32_t invoker;  // method def index containing the invoke
  std::uint32_t offset;
  std::uint32_t depth;
};

struct MemoEmit {
  std::uint32_t ref;
  std::uint32_t invoker;
  std::uint32_t offset;
  std::uint32_t rel_depth;
};

struct Frame {
  std::uint32_t method;
  std::uint32_t inst_idx;
  std::size_t emit_start;
  std::uint32_t depth;
  bool tainted;
};

}  // namespace extdetail

// Depth-first invocation traversal from each root, emitting external APIs in
// original instruction order. An internal invoke descends; a target already
// on the DFS stack is skipped. Flattened per-method subsequences are memoized
// and replayed at later call sites, but only when the expansion completed
// without any recursion cut: a cut anywhere in the subtree makes the result
// context-sensitive (a different call site can place different methods on the
// stack), so tainted expansions are recomputed instead.
inline std::pair<BehaviorSequence, TraversalStats> extract_sequence(
    const DexProgram& program, const CallGraph& graph, const ExtractionConfig& config = {}) {
  using extdetail::Emit;
  using extdetail::Frame;
  using extdetail::MemoEmit;

  const std::size_t n = program.methods.size();
  BehaviorSequence seq;
  TraversalStats stats;
  stats.n = n;
  if (n > 0) {
    std::uint64_t sites = 0;
    for (auto deg : graph.out_degree) sites += deg;
    stats.n_avg = static_cast<double>(sites) / static_cast<double>(n);
  }

  std::vector<Emit> out;
  std::vector<std::optional<std::vector<MemoEmit>>> memo(n);
  std::vector<bool> on_stack(n, false);
  std::vector<Frame> stack;
  std::uint64_t depth_sum = 0;
  bool truncated = false;

  auto emit = [&](std::uint32_t ref, std::uint32_t invoker, std::uint32_t offset,
                  std::uint32_t depth) -> bool {
    if (out.size() >= config.max_len) {
      truncated = true;
      return false;
    }
    out.push_back(Emit{ref, invoker, offset, depth});
    depth_sum += depth;
    return true;
  };

  for (std::uint32_t root : graph.roots) {
    if (truncated) break;
    const std::size_t span_start = out.size();

    stack.push_back(Frame{root, 0, out.size(), 1, false});
    on_stack[root] = true;

    while (!stack.empty() && !truncated) {
      Frame& f = stack.back();
      const auto& instructions = program.methods[f.method].instructions;
      if (f.inst_idx >= instructions.size()) {
        // expansion complete; memoize when context-independent
        std::size_t len = out.size() - f.emit_start;
        if (!f.tainted && !memo[f.method] && len <= config.memo_cap) {
          std::vector<MemoEmit> entry;
          entry.reserve(len);
          for (std::size_t i = f.emit_start; i < out.size(); ++i) {
            entry.push_back(MemoEmit{out[i].ref, out[i].invoker, out[i].offset,
                                     out[i].depth - f.depth});
          }
          memo[f.method] = std::move(entry);
        }
        on_stack[f.method] = false;
        stack.pop_back();
        continue;
      }

      const Instruction& ins = instructions[f.inst_idx++];
      if (!ins.invoke_target) continue;
      const std::uint32_t ref = *ins.invoke_target;
      const RefKind kind = program.method_refs[ref].kind;

      if (kind == RefKind::ExternalApi) {
        if (!emit(ref, f.method, ins.offset, f.depth)) break;
        continue;
      }
      if (kind != RefKind::Internal) continue;

      const std::uint32_t target = program.def_of_ref[ref];
      if (on_stack[target]) {
        for (Frame& g : stack) g.tainted = true;
        continue;
      }
      if (memo[target]) {
        ++stats.memo_hits;
        const std::uint32_t base_depth = f.depth + 1;
        for (const MemoEmit& e : *memo[target]) {
          if (!emit(e.ref, e.invoker, e.offset, base_depth + e.rel_depth)) break;
        }
        continue;
      }
      stack.push_back(Frame{target, 0, out.size(),
                            static_cast<std::uint32_t>(stack.back().depth + 1), false});
      on_stack[target] = true;
    }

    for (const Frame& f : stack) on_stack[f.method] = false;
    stack.clear();

    seq.subsequence_bounds.push_back(SubsequenceSpan{root, span_start, out.size()});
  }

  seq.truncated = truncated;
  seq.apis.reserve(out.size());
  seq.provenance.reserve(out.size());
  for (const auto& span : seq.subsequence_bounds) {
    for (std::size_t i = span.start; i < span.end; ++i) {
      seq.apis.push_back(program.method_refs[out[i].ref].signature());
      seq.provenance.push_back(Provenance{out[i].invoker, span.root, out[i].offset});
    }
  }

  stats.emitted_len = out.size();
  if (!out.empty()) {
    stats.d = static_cast<double>(depth_sum) / static_cast<double>(out.size());
  } else {
    stats.d = graph.roots.empty() ? 0.0 : 1.0;
  }
  return {std::move(seq), stats};
}

}  // namespace malseq

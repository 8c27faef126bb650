#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <vector>

#include "malseq/dex_types.hpp"

namespace malseq {

// Cross-reference over internal methods. Edges exist only between internal
// methods; external invokes are sequence emissions, not graph edges.
// r_from keeps call sites in instruction order with multiplicity; r_to and
// in_degree count distinct callers.
struct CallGraph {
  std::vector<std::vector<std::uint32_t>> r_from;
  std::vector<std::set<std::uint32_t>> r_to;
  std::vector<std::uint32_t> in_degree;    // |r_to|
  std::vector<std::uint32_t> out_degree;   // |r_from|, call sites
  std::vector<std::uint32_t> roots;        // in_degree 0, out_degree != 0
};

inline CallGraph build_cross_reference(const DexProgram& program) {
  CallGraph g;
  const std::size_t n = program.methods.size();
  g.r_from.resize(n);
  g.r_to.resize(n);
  for (std::uint32_t m = 0; m < n; ++m) {
    for (const Instruction& ins : program.methods[m].instructions) {
      if (!ins.invoke_target) continue;
      std::uint32_t callee_def = program.def_of_ref[*ins.invoke_target];
      if (callee_def == DexProgram::npos) continue;
      g.r_from[m].push_back(callee_def);
      g.r_to[callee_def].insert(m);
    }
  }
  g.in_degree.resize(n);
  g.out_degree.resize(n);
  for (std::uint32_t m = 0; m < n; ++m) {
    g.in_degree[m] = static_cast<std::uint32_t>(g.r_to[m].size());
    g.out_degree[m] = static_cast<std::uint32_t>(g.r_from[m].size());
  }

  std::vector<std::uint32_t> roots;
  for (std::uint32_t m = 0; m < n; ++m) {
    if (g.in_degree[m] == 0 && g.out_degree[m] != 0) roots.push_back(m);
  }
  std::sort(roots.begin(), roots.end(), [&](std::uint32_t a, std::uint32_t b) {
    const MethodRef& ra = program.ref_of(program.methods[a]);
    const MethodRef& rb = program.ref_of(program.methods[b]);
    return ra < rb;
  });
  g.roots = std::move(roots);
  return g;
}

inline std::vector<std::uint32_t> find_root_methods(const CallGraph& graph) {
  return graph.roots;
}

}  // namespace malseq

#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "malseq/call_graph.hpp"
#include "malseq/extraction.hpp"
#include "malseq/synthetic.hpp"
#include "malseq/text_ir.hpp"

using namespace malseq;

TEST_CASE("benign programs have no ground truth") {
  auto spec = default_synthetic_spec();
  Rng rng(1);
  auto prog = generate_synthetic_program(spec, Label::Benign, rng);
  CHECK(prog.planted.empty());
  CHECK(prog.label == Label::Benign);
  auto p = load_ir(prog.ir_json);
  CHECK(p.label == Label::Benign);
  CHECK(p.methods.size() >= spec.min_methods);
  CHECK(p.methods.size() <= spec.max_methods);
}

TEST_CASE("malicious programs plant the motif in reachable methods") {
  auto spec = default_synthetic_spec();
  spec.planted_methods = 2;
  for (std::uint64_t round = 0; round < 20; ++round) {
    Rng rng(mix_seed(7, round));
    auto prog = generate_synthetic_program(spec, Label::Malicious, rng);
    REQUIRE(prog.planted.size() == 2);

    auto p = load_ir(prog.ir_json);
    auto g = build_cross_reference(p);
    auto [seq, stats] = extract_sequence(p, g);
    CHECK_FALSE(seq.truncated);
    CHECK(seq.apis.size() <= spec.max_sequence_len);

    // every planted method must emit the full motif contiguously
    std::set<std::string> motif_apis;
    for (const auto& pool : spec.motif_pools) {
      for (const auto& api : pool) motif_apis.insert(api);
    }
    for (const auto& planted_sig : prog.planted) {
      bool found = false;
      for (std::size_t i = 0; i + 2 < seq.apis.size() && !found; ++i) {
        if (!motif_apis.count(seq.apis[i])) continue;
        bool contiguous = true;
        for (std::size_t k = 0; k < 3; ++k) {
          if (p.method_signature(seq.provenance[i + k].direct_invoker) != planted_sig ||
              !motif_apis.count(seq.apis[i + k])) {
            contiguous = false;
            break;
          }
        }
        found = contiguous;
      }
      INFO("planted method " << planted_sig);
      CHECK(found);
    }
  }
}

TEST_CASE("generation is reproducible from the stream seed") {
  auto spec = default_synthetic_spec();
  Rng a(99), b(99);
  auto p1 = generate_synthetic_program(spec, Label::Malicious, a);
  auto p2 = generate_synthetic_program(spec, Label::Malicious, b);
  CHECK(p1.ir_json == p2.ir_json);
  CHECK(p1.planted == p2.planted);

  Rng c(100);
  auto p3 = generate_synthetic_program(spec, Label::Malicious, c);
  CHECK(p1.ir_json != p3.ir_json);
}

TEST_CASE("infeasible specs are rejected") {
  auto spec = default_synthetic_spec();
  spec.planted_methods = 1000;
  Rng rng(5);
  CHECK_THROWS_AS(generate_synthetic_program(spec, Label::Malicious, rng), Error);

  auto no_pools = default_synthetic_spec();
  no_pools.motif_pools.clear();
  Rng rng2(6);
  CHECK_THROWS_AS(generate_synthetic_program(no_pools, Label::Malicious, rng2), Error);
  CHECK_NOTHROW(generate_synthetic_program(no_pools, Label::Benign, rng2));
}

TEST_CASE("generated programs stay within the expansion budget") {
  auto spec = default_synthetic_spec();
  spec.extra_edge_probability = 0.4;  // stress the budget check
  for (std::uint64_t round = 0; round < 30; ++round) {
    Rng rng(mix_seed(31, round));
    auto prog = generate_synthetic_program(spec, round % 2 ? Label::Malicious : Label::Benign,
                                           rng);
    auto p = load_ir(prog.ir_json);
    auto g = build_cross_reference(p);
    auto [seq, stats] = extract_sequence(p, g);
    CHECK(seq.apis.size() <= spec.max_sequence_len);
    CHECK_FALSE(g.roots.empty());
  }
}

TEST_CASE("manifest lines round-trip") {
  ManifestEntry e;
  e.id = "sample_7";
  e.label = Label::Malicious;
  e.path = "sample_7.json";
  e.planted = {"La;->f()V", "Lb;->g()V"};
  auto line = manifest_to_json_line(e);
  auto back = manifest_from_json_line(line);
  CHECK(back.id == e.id);
  CHECK(back.label == e.label);
  CHECK(back.path == e.path);
  CHECK(back.planted == e.planted);

  CHECK_THROWS_AS(manifest_from_json_line("{}"), Error);
  CHECK_THROWS_AS(manifest_from_json_line("not json"), Error);
}

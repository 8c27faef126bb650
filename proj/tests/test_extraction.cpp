#include <catch2/catch_amalgamated.hpp>

#include "malseq/extraction.hpp"
#include "malseq/text_ir.hpp"
#include "support/oracle.hpp"

using namespace malseq;

namespace {

// Root b/a() emits API1..API2 directly, descends through two helpers that
// emit API5..API9, then finishes with API3..API4.
DexProgram nested_helpers_program() {
  return load_ir(R"({"methods":[
      {"class":"Lb;","name":"a","proto":"()V","invokes":[
        "Landroid/seq/Api1;->call()V",
        "Landroid/seq/Api2;->call()V",
        "Lc;->h1()V",
        "Landroid/seq/Api3;->call()V",
        "Landroid/seq/Api4;->call()V"]},
      {"class":"Lc;","name":"h1","proto":"()V","invokes":[
        "Landroid/seq/Api5;->call()V",
        "Landroid/seq/Api6;->call()V",
        "Ld;->h2()V",
        "Landroid/seq/Api9;->call()V"]},
      {"class":"Ld;","name":"h2","proto":"()V","invokes":[
        "Landroid/seq/Api7;->call()V",
        "Landroid/seq/Api8;->call()V"]}]})");
}

std::vector<std::string> short_names(const BehaviorSequence& seq) {
  std::vector<std::string> out;
  for (const auto& api : seq.apis) {
    auto start = api.find("Api");
    out.push_back(api.substr(start, api.find(';') - start));
  }
  return out;
}

bool same_sequence(const BehaviorSequence& a, const BehaviorSequence& b) {
  if (a.apis != b.apis || a.truncated != b.truncated) return false;
  if (a.provenance.size() != b.provenance.size()) return false;
  for (std::size_t i = 0; i < a.provenance.size(); ++i) {
    if (!(a.provenance[i] == b.provenance[i])) return false;
  }
  if (a.subsequence_bounds.size() != b.subsequence_bounds.size()) return false;
  for (std::size_t i = 0; i < a.subsequence_bounds.size(); ++i) {
    const auto& x = a.subsequence_bounds[i];
    const auto& y = b.subsequence_bounds[i];
    if (x.root != y.root || x.start != y.start || x.end != y.end) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("nested helper expansion emits in figure order") {
  auto p = nested_helpers_program();
  auto g = build_cross_reference(p);
  auto [seq, stats] = extract_sequence(p, g);
  CHECK(short_names(seq) == std::vector<std::string>{"Api1", "Api2", "Api5", "Api6", "Api7",
                                                     "Api8", "Api9", "Api3", "Api4"});
  CHECK(stats.emitted_len == 9);
  CHECK_FALSE(seq.truncated);

  // provenance: Api7 belongs to the deepest helper, entered from the root
  CHECK(p.method_signature(seq.provenance[4].direct_invoker) == "Ld;->h2()V");
  CHECK(p.method_signature(seq.provenance[4].root) == "Lb;->a()V");
  CHECK(p.method_signature(seq.provenance[0].direct_invoker) == "Lb;->a()V");
}

TEST_CASE("self recursion is skipped, neighbours still emit") {
  auto p = load_ir(R"({"methods":[
      {"class":"Lr;","name":"f","proto":"()V","invokes":["Lf;->f()V"]},
      {"class":"Lf;","name":"f","proto":"()V","invokes":[
        "Landroid/seq/Api1;->call()V","Lf;->f()V","Landroid/seq/Api2;->call()V"]}]})");
  auto g = build_cross_reference(p);
  auto [seq, stats] = extract_sequence(p, g);
  CHECK(short_names(seq) == std::vector<std::string>{"Api1", "Api2"});
  for (const auto& prov : seq.provenance) {
    CHECK(p.method_signature(prov.direct_invoker) == "Lf;->f()V");
  }
}

TEST_CASE("empty program extracts an empty sequence") {
  DexProgram p;
  auto g = build_cross_reference(p);
  auto [seq, stats] = extract_sequence(p, g);
  CHECK(seq.apis.empty());
  CHECK(stats.n == 0);
  CHECK(stats.d == 0.0);
  CHECK(stats.emitted_len == 0);
}

TEST_CASE("ignored externals emit nothing") {
  auto p = load_ir(R"({"methods":[
      {"class":"La;","name":"f","proto":"()V","invokes":[
        "Ljava/lang/String;->length()I","Lb;->f()V"]},
      {"class":"Lb;","name":"f","proto":"()V","invokes":["Lcom/vendor/Sdk;->run()V"]}]})");
  auto g = build_cross_reference(p);
  auto [seq, stats] = extract_sequence(p, g);
  CHECK(seq.apis.empty());
  CHECK(seq.subsequence_bounds.size() == 1);
  CHECK(stats.d == 1.0);  // roots exist, no emissions
}

TEST_CASE("shared helpers are replayed from the memo") {
  auto p = load_ir(R"({"methods":[
      {"class":"Lr;","name":"f","proto":"()V","invokes":["La;->f()V","Lb;->f()V"]},
      {"class":"La;","name":"f","proto":"()V","invokes":["Lshared;->f()V"]},
      {"class":"Lb;","name":"f","proto":"()V","invokes":["Lshared;->f()V"]},
      {"class":"Lshared;","name":"f","proto":"()V","invokes":[
        "Landroid/seq/Api1;->call()V","Landroid/seq/Api2;->call()V"]}]})");
  auto g = build_cross_reference(p);
  auto [seq, stats] = extract_sequence(p, g);
  CHECK(short_names(seq) == std::vector<std::string>{"Api1", "Api2", "Api1", "Api2"});
  CHECK(stats.memo_hits >= 1);

  // each emission keeps the shared method as its direct invoker
  for (const auto& prov : seq.provenance) {
    CHECK(p.method_signature(prov.direct_invoker) == "Lshared;->f()V");
  }
}

TEST_CASE("memoized extraction equals the oracle on random programs") {
  Rng rng(90210);
  for (int round = 0; round < 300; ++round) {
    auto p = oracle::random_program(rng);
    auto g = build_cross_reference(p);
    auto expected = oracle::extract(p, g);
    auto [actual, stats] = extract_sequence(p, g);
    REQUIRE(same_sequence(actual, expected));
  }
}

TEST_CASE("truncation matches the oracle and sets the flag") {
  Rng rng(5150);
  ExtractionConfig config;
  config.max_len = 7;
  int truncated_seen = 0;
  for (int round = 0; round < 200; ++round) {
    auto p = oracle::random_program(rng);
    auto g = build_cross_reference(p);
    auto expected = oracle::extract(p, g, config);
    auto [actual, stats] = extract_sequence(p, g, config);
    REQUIRE(same_sequence(actual, expected));
    if (actual.truncated) {
      ++truncated_seen;
      CHECK(actual.apis.size() == config.max_len);
    }
  }
  CHECK(truncated_seen > 10);
}

TEST_CASE("memo cap only disables caching, never changes output") {
  Rng rng(31337);
  ExtractionConfig capped;
  capped.memo_cap = 2;
  for (int round = 0; round < 100; ++round) {
    auto p = oracle::random_program(rng);
    auto g = build_cross_reference(p);
    auto [with_cap, s1] = extract_sequence(p, g, capped);
    auto [without, s2] = extract_sequence(p, g);
    REQUIRE(same_sequence(with_cap, without));
  }
}

TEST_CASE("emitted positions point at real invoke instructions") {
  Rng rng(777);
  for (int round = 0; round < 100; ++round) {
    auto p = oracle::random_program(rng);
    auto g = build_cross_reference(p);
    auto [seq, stats] = extract_sequence(p, g);
    for (std::size_t i = 0; i < seq.apis.size(); ++i) {
      const auto& prov = seq.provenance[i];
      bool found = false;
      for (const auto& ins : p.methods[prov.direct_invoker].instructions) {
        if (ins.offset == prov.instruction_offset && ins.invoke_target &&
            p.method_refs[*ins.invoke_target].signature() == seq.apis[i]) {
          found = true;
          break;
        }
      }
      REQUIRE(found);
    }
  }
}

TEST_CASE("subsequence bounds partition the sequence in root order") {
  Rng rng(4242);
  for (int round = 0; round < 100; ++round) {
    auto p = oracle::random_program(rng);
    auto g = build_cross_reference(p);
    auto [seq, stats] = extract_sequence(p, g);
    if (seq.truncated) continue;
    REQUIRE(seq.subsequence_bounds.size() == g.roots.size());
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < seq.subsequence_bounds.size(); ++i) {
      const auto& span = seq.subsequence_bounds[i];
      CHECK(span.root == g.roots[i]);
      CHECK(span.start == cursor);
      CHECK(span.end >= span.start);
      cursor = span.end;
      for (std::size_t pos = span.start; pos < span.end; ++pos) {
        CHECK(seq.provenance[pos].root == span.root);
      }
    }
    CHECK(cursor == seq.apis.size());
  }
}

TEST_CASE("extraction is deterministic") {
  Rng rng(1);
  auto p = oracle::random_program(rng);
  auto g = build_cross_reference(p);
  auto [a, s1] = extract_sequence(p, g);
  auto [b, s2] = extract_sequence(p, g);
  CHECK(same_sequence(a, b));
  CHECK(s1.memo_hits == s2.memo_hits);
  CHECK(s1.d == s2.d);
}

TEST_CASE("traversal stats describe the program") {
  auto p = nested_helpers_program();
  auto g = build_cross_reference(p);
  auto [seq, stats] = extract_sequence(p, g);
  CHECK(stats.n == 3);
  // 2 internal call sites over 3 methods
  CHECK(stats.n_avg == Catch::Approx(2.0 / 3.0));
  // depths: root emissions at 1 (4 of them), h1 at 2 (3), h2 at 3 (2)
  CHECK(stats.d == Catch::Approx((4.0 * 1 + 3.0 * 2 + 2.0 * 3) / 9.0));
}

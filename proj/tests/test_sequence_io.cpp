#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "malseq/call_graph.hpp"
#include "malseq/sequence_io.hpp"
#include "malseq/text_ir.hpp"

using namespace malseq;

TEST_CASE("sequence records round-trip through json lines") {
  auto p = load_ir(R"({"methods":[
      {"class":"Lr;","name":"f","proto":"()V","invokes":[
        "Landroid/seq/Api1;->call()V","Lh;->f()V"]},
      {"class":"Lh;","name":"f","proto":"()V","invokes":["Landroid/seq/Api2;->call()V"]}],
      "label":"malicious"})");
  p.name = "prog_1";
  auto g = build_cross_reference(p);
  auto [seq, stats] = extract_sequence(p, g);
  auto rec = make_sequence_record(p, seq);

  CHECK(rec.id == "prog_1");
  CHECK(rec.label == Label::Malicious);
  REQUIRE(rec.apis.size() == 2);
  CHECK(rec.provenance[0].invoker == "Lr;->f()V");
  CHECK(rec.provenance[1].invoker == "Lh;->f()V");
  CHECK(rec.provenance[1].root == "Lr;->f()V");

  auto line = sequence_record_to_json_line(rec);
  auto back = sequence_record_from_json_line(line);
  CHECK(back.id == rec.id);
  CHECK(back.label == rec.label);
  CHECK(back.apis == rec.apis);
  CHECK(back.truncated == rec.truncated);
  CHECK(back.provenance.size() == rec.provenance.size());
  CHECK(sequence_record_to_json_line(back) == line);
}

TEST_CASE("dump files hold one record per line") {
  SequenceRecord a;
  a.id = "a";
  a.apis = {"x"};
  a.provenance = {{"Lm;->f()V", "Lm;->f()V", 0}};
  SequenceRecord b;
  b.id = "b";
  b.label = Label::Benign;

  std::stringstream ss;
  write_sequence_dump(ss, {a, b});
  auto records = read_sequence_dump(ss);
  REQUIRE(records.size() == 2);
  CHECK(records[0].id == "a");
  CHECK_FALSE(records[0].label.has_value());
  CHECK(records[1].id == "b");
  CHECK(records[1].label == Label::Benign);
}

TEST_CASE("malformed records are rejected") {
  CHECK_THROWS_AS(sequence_record_from_json_line("{}"), Error);
  CHECK_THROWS_AS(sequence_record_from_json_line("no"), Error);
  CHECK_THROWS_AS(sequence_record_from_json_line(
                      R"({"id":"x","apis":["a"],"provenance":[],"truncated":false})"),
                  Error);
  CHECK_THROWS_AS(sequence_record_from_json_line(
                      R"({"id":"x","apis":[],"provenance":[["only-two","fields"]],"truncated":false})"),
                  Error);
}

#include <catch2/catch_amalgamated.hpp>

#include <numeric>

#include "malseq/call_graph.hpp"
#include "malseq/report.hpp"
#include "malseq/text_ir.hpp"

using namespace malseq;

namespace {

struct ReportScenario {
  DexProgram program;
  BehaviorSequence seq;
  AttentionTrace trace;
  std::vector<SuspectApi> suspects;
  std::vector<MethodSuspicion> methods;

  ReportScenario() {
    program = load_ir(R"({"methods":[
        {"class":"Lroot1;","name":"f","proto":"()V",
         "invokes":["Lwork;->f(Ljava/lang/String;I)Z"]},
        {"class":"Lroot2;","name":"g","proto":"(I)V",
         "invokes":["Lwork;->f(Ljava/lang/String;I)Z"]},
        {"class":"Lwork;","name":"f","proto":"(Ljava/lang/String;I)Z","invokes":[
          "Landroid/telephony/SmsManager;->getDefault()Landroid/telephony/SmsManager;",
          "Landroid/telephony/SmsManager;->sendTextMessage(Ljava/lang/String;)V"]}]})");
    program.name = "sample_x";
    auto graph = build_cross_reference(program);
    auto [s, st] = extract_sequence(program, graph);
    seq = std::move(s);

    trace.valid_len = static_cast<std::uint32_t>(seq.apis.size());
    trace.position_map.resize(trace.valid_len);
    std::iota(trace.position_map.begin(), trace.position_map.end(), 0);
    trace.alpha = {0.1, 0.4, 0.2, 0.3};
    trace.alpha.resize(8, 0.0);
    trace.p = {0.97, 0.03};

    suspects = top_k_suspects(trace, seq, 4);
    methods = suspect_scores(suspects, program);
  }
};

}  // namespace

TEST_CASE("reports carry three parts with the dominant method first") {
  ReportScenario sc;
  auto report = generate_report(sc.program, sc.seq, sc.trace, sc.suspects,
                                select_methods(sc.methods, 9), ReportConfig{4, 9});

  CHECK(report.brief.program == "sample_x");
  CHECK(report.brief.source == "ir");
  CHECK(report.brief.methods == 3);
  CHECK(report.brief.sequence_length == 4);
  CHECK(report.brief.probability[0] == Catch::Approx(0.97));

  REQUIRE(report.summary.size() == 4);
  CHECK(report.summary[0].attention == Catch::Approx(0.4));
  CHECK(report.summary[0].api == "Landroid/telephony/SmsManager;->sendTextMessage(Ljava/lang/String;)V");

  REQUIRE(report.details.size() == 1);  // every suspect lives in Lwork;
  const auto& d = report.details[0];
  CHECK(d.signature == "Lwork;->f(Ljava/lang/String;I)Z");
  CHECK(d.sus == Catch::Approx(1.0));
  CHECK(d.parameters == std::vector<std::string>{"Ljava/lang/String;", "I"});
  CHECK(d.return_type == "Z");
  REQUIRE(d.entry_points.size() == 2);
  CHECK(d.entry_points[0] == "Lroot1;->f()V");
  CHECK(d.entry_points[1] == "Lroot2;->g(I)V");
  REQUIRE(d.invokes.size() == 2);
  CHECK(d.invokes[0].find("invoke") != std::string::npos);
  CHECK(d.invokes[0].find("getDefault") != std::string::npos);
}

TEST_CASE("detail list respects the configured n") {
  ReportScenario sc;
  auto report = generate_report(sc.program, sc.seq, sc.trace, sc.suspects,
                                select_methods(sc.methods, 9), ReportConfig{4, 0});
  CHECK(report.details.empty());
}

TEST_CASE("json rendering has the stable top-level schema") {
  ReportScenario sc;
  auto report = generate_report(sc.program, sc.seq, sc.trace, sc.suspects,
                                select_methods(sc.methods, 9), ReportConfig{4, 9});
  auto j = report_to_json(report);
  REQUIRE(j.contains("brief"));
  REQUIRE(j.contains("summary"));
  REQUIRE(j.contains("details"));
  CHECK(j["brief"]["program"] == "sample_x");
  CHECK(j["brief"]["probability"]["malicious"] == Catch::Approx(0.97));
  CHECK(j["summary"].size() == 4);
  CHECK(j["summary"][0].contains("attention"));
  CHECK(j["details"][0]["entry_points"].size() == 2);
  CHECK(j["details"][0]["suspect_apis"].size() == 4);

  // byte-identical across renderings
  CHECK(j.dump() == report_to_json(report).dump());
}

TEST_CASE("text rendering mirrors the three sections") {
  ReportScenario sc;
  auto report = generate_report(sc.program, sc.seq, sc.trace, sc.suspects,
                                select_methods(sc.methods, 9), ReportConfig{4, 9},
                                {{"package", "com.sample.x"}});
  auto text = report_to_text(report);
  CHECK(text.find("Brief information") != std::string::npos);
  CHECK(text.find("Summary") != std::string::npos);
  CHECK(text.find("Details") != std::string::npos);
  CHECK(text.find("package: com.sample.x") != std::string::npos);
  CHECK(text.find("sendTextMessage") != std::string::npos);
  CHECK(report_to_text(report) == text);
}

TEST_CASE("type descriptor splitting handles arrays and objects") {
  CHECK(split_type_descriptors("") == std::vector<std::string>{});
  CHECK(split_type_descriptors("IZ") == std::vector<std::string>{"I", "Z"});
  CHECK(split_type_descriptors("[I[[J") == std::vector<std::string>{"[I", "[[J"});
  CHECK(split_type_descriptors("Ljava/lang/String;I[Landroid/os/Bundle;") ==
        std::vector<std::string>{"Ljava/lang/String;", "I", "[Landroid/os/Bundle;"});
}

#pragma once

#include <array>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "malseq/dex_types.hpp"
#include "malseq/extraction.hpp"
#include "malseq/localization.hpp"

namespace malseq {

// Splits the parameter block of "(ABC)R" into individual type descriptors.
inline std::vector<std::string> split_type_descriptors(const std::string& params) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < params.size()) {
    std::size_t start = i;
    while (i < params.size() && params[i] == '[') ++i;
    if (i < params.size() && params[i] == 'L') {
      auto semi = params.find(';', i);
      if (semi == std::string::npos) break;
      i = semi + 1;
    } else if (i < params.size()) {
      ++i;
    }
    out.push_back(params.substr(start, i - start));
  }
  return out;
}

struct ReportConfig {
  std::uint32_t k = 200;
  std::uint32_t n = 9;
};

struct Report {
  struct Brief {
    std::string program;
    std::string source;  // "dex" or "ir"
    std::size_t classes = 0;
    std::size_t methods = 0;
    std::size_t api_refs = 0;
    std::size_t sequence_length = 0;
    bool truncated = false;
    std::array<double, 2> probability{};  // {malicious, benign}
    std::map<std::string, std::string> metadata;  // optional, empty unless supplied
  };
  struct SummaryEntry {
    std::uint32_t position = 0;
    std::string api;
    double attention = 0.0;
    std::string method;  // direct invoker
    std::string root;
  };
  struct MethodDetail {
    std::string signature;
    double sus = 0.0;
    std::vector<std::string> parameters;
    std::string return_type;
    std::vector<std::string> entry_points;
    std::vector<SummaryEntry> suspect_apis;
    std::vector<std::string> invokes;  // disassembled invoke listing
  };

  Brief brief;
  std::vector<SummaryEntry> summary;
  std::vector<MethodDetail> details;
};

namespace repdetail {

inline std::string render_invoke(const DexProgram& program, const Instruction& ins) {
  char off[16];
  std::snprintf(off, sizeof(off), "%04x", ins.offset);
  const MethodRef& target = program.method_refs[*ins.invoke_target];
  const char* mnemonic =
      program.source == Source::DexBinary ? invoke_mnemonic(ins.opcode) : "invoke";
  std::string line = std::string(off) + ": " + mnemonic + " " + target.signature();
  if (target.kind == RefKind::ExternalApi) line += "  ; api";
  else if (target.kind == RefKind::Internal) line += "  ; internal";
  return line;
}

}  // namespace repdetail

// Three-part analyst report: brief program information, the k-suspect
// summary, and per-method detail with the disassembled invoke listing.
inline Report generate_report(const DexProgram& program, const BehaviorSequence& seq,
                              const AttentionTrace& trace,
                              const std::vector<SuspectApi>& suspects,
                              const std::vector<MethodSuspicion>& methods,
                              const ReportConfig& config,
                              const std::map<std::string, std::string>& metadata = {}) {
  Report report;
  report.brief.program = program.name;
  report.brief.source = program.source == Source::DexBinary ? "dex" : "ir";
  report.brief.classes = program.classes.size();
  report.brief.methods = program.methods.size();
  std::size_t api_refs = 0;
  for (const auto& ref : program.method_refs) {
    if (ref.kind == RefKind::ExternalApi) ++api_refs;
  }
  report.brief.api_refs = api_refs;
  report.brief.sequence_length = seq.size();
  report.brief.truncated = seq.truncated;
  report.brief.probability = trace.p;
  report.brief.metadata = metadata;

  auto to_entry = [&](const SuspectApi& s) {
    Report::SummaryEntry e;
    e.position = s.position;
    e.api = s.api;
    e.attention = s.alpha;
    e.method = program.method_signature(s.direct_invoker);
    e.root = program.method_signature(s.root);
    return e;
  };
  for (const auto& s : suspects) report.summary.push_back(to_entry(s));

  std::size_t limit = std::min<std::size_t>(methods.size(), config.n);
  for (std::size_t i = 0; i < limit; ++i) {
    const MethodSuspicion& m = methods[i];
    Report::MethodDetail d;
    d.signature = m.signature;
    d.sus = m.sus;
    const MethodRef& ref = program.ref_of(program.methods[m.method]);
    auto close = ref.proto.find(')');
    d.parameters = split_type_descriptors(ref.proto.substr(1, close - 1));
    d.return_type = ref.proto.substr(close + 1);
    for (std::uint32_t r : m.entry_points) d.entry_points.push_back(program.method_signature(r));
    for (std::uint32_t pos : m.contributing) {
      for (const auto& s : suspects) {
        if (s.position == pos) {
          d.suspect_apis.push_back(to_entry(s));
          break;
        }
      }
    }
    for (const Instruction& ins : program.methods[m.method].instructions) {
      if (ins.invoke_target) d.invokes.push_back(repdetail::render_invoke(program, ins));
    }
    report.details.push_back(std::move(d));
  }
  return report;
}

inline nlohmann::json report_to_json(const Report& report) {
  nlohmann::json j;
  auto& brief = j["brief"];
  brief["program"] = report.brief.program;
  brief["source"] = report.brief.source;
  brief["classes"] = report.brief.classes;
  brief["methods"] = report.brief.methods;
  brief["api_refs"] = report.brief.api_refs;
  brief["sequence_length"] = report.brief.sequence_length;
  brief["truncated"] = report.brief.truncated;
  brief["probability"] = {{"malicious", report.brief.probability[0]},
                          {"benign", report.brief.probability[1]}};
  brief["metadata"] = report.brief.metadata;

  auto entry_json = [](const Report::SummaryEntry& e) {
    nlohmann::json je;
    je["position"] = e.position;
    je["api"] = e.api;
    je["attention"] = e.attention;
    je["method"] = e.method;
    je["root"] = e.root;
    return je;
  };
  j["summary"] = nlohmann::json::array();
  for (const auto& e : report.summary) j["summary"].push_back(entry_json(e));

  j["details"] = nlohmann::json::array();
  for (const auto& d : report.details) {
    nlohmann::json jd;
    jd["method"] = d.signature;
    jd["sus"] = d.sus;
    jd["parameters"] = d.parameters;
    jd["return"] = d.return_type;
    jd["entry_points"] = d.entry_points;
    jd["suspect_apis"] = nlohmann::json::array();
    for (const auto& e : d.suspect_apis) jd["suspect_apis"].push_back(entry_json(e));
    jd["invokes"] = d.invokes;
    j["details"].push_back(std::move(jd));
  }
  return j;
}

inline std::string report_to_text(const Report& report) {
  std::ostringstream os;
  char buf[64];
  os << "==== Brief information ====\n";
  os << "program:          " << report.brief.program << "\n";
  os << "source:           " << report.brief.source << "\n";
  os << "classes:          " << report.brief.classes << "\n";
  os << "methods:          " << report.brief.methods << "\n";
  os << "api references:   " << report.brief.api_refs << "\n";
  os << "sequence length:  " << report.brief.sequence_length
     << (report.brief.truncated ? " (truncated)" : "") << "\n";
  std::snprintf(buf, sizeof(buf), "%.4f / %.4f", report.brief.probability[0],
                report.brief.probability[1]);
  os << "p(malicious/benign): " << buf << "\n";
  for (const auto& [key, value] : report.brief.metadata) {
    os << key << ": " << value << "\n";
  }

  os << "\n==== Summary: suspected APIs ====\n";
  std::size_t rank = 1;
  for (const auto& e : report.summary) {
    std::snprintf(buf, sizeof(buf), "%.6f", e.attention);
    os << rank++ << ". [" << buf << "] " << e.api << "\n     in " << e.method << "\n";
  }

  os << "\n==== Details: suspected methods ====\n";
  rank = 1;
  for (const auto& d : report.details) {
    std::snprintf(buf, sizeof(buf), "%.6f", d.sus);
    os << "-- method " << rank++ << ": " << d.signature << "\n";
    os << "   sus score:   " << buf << "\n";
    os << "   parameters:  ";
    if (d.parameters.empty()) os << "(none)";
    for (std::size_t i = 0; i < d.parameters.size(); ++i) {
      os << (i ? ", " : "") << d.parameters[i];
    }
    os << "\n   returns:     " << d.return_type << "\n";
    os << "   entry points:\n";
    for (const auto& r : d.entry_points) os << "     " << r << "\n";
    os << "   suspected APIs:\n";
    for (const auto& e : d.suspect_apis) {
      std::snprintf(buf, sizeof(buf), "%.6f", e.attention);
      os << "     [" << buf << "] @" << e.position << " " << e.api << "\n";
    }
    os << "   invokes:\n";
    for (const auto& line : d.invokes) os << "     " << line << "\n";
  }
  return os.str();
}

}  // namespace malseq

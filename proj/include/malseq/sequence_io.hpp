#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "malseq/dex_types.hpp"
#include "malseq/error.hpp"
#include "malseq/extraction.hpp"

namespace malseq {

// One line of the sequence dump: a program's extracted behavior sequence with
// provenance resolved to method signatures. Field names are part of the
// format: id, label, apis, provenance, truncated. Provenance triples are
// [direct_invoker, root, instruction_offset].
struct SequenceRecord {
  std::string id;
  std::optional<Label> label;
  std::vector<std::string> apis;
  struct Prov {
    std::string invoker;
    std::string root;
    std::uint32_t offset = 0;
  };
  std::vector<Prov> provenance;
  bool truncated = false;
};

inline SequenceRecord make_sequence_record(const DexProgram& program,
                                           const BehaviorSequence& seq) {
  SequenceRecord rec;
  rec.id = program.name;
  rec.label = program.label;
  rec.apis = seq.apis;
  rec.truncated = seq.truncated;
  rec.provenance.reserve(seq.provenance.size());
  for (const auto& p : seq.provenance) {
    rec.provenance.push_back(SequenceRecord::Prov{program.method_signature(p.direct_invoker),
                                                  program.method_signature(p.root),
                                                  p.instruction_offset});
  }
  return rec;
}

inline std::string sequence_record_to_json_line(const SequenceRecord& rec) {
  nlohmann::json j;
  j["id"] = rec.id;
  j["label"] = rec.label ? nlohmann::json(label_name(*rec.label)) : nlohmann::json(nullptr);
  j["apis"] = rec.apis;
  auto prov = nlohmann::json::array();
  for (const auto& p : rec.provenance) {
    prov.push_back(nlohmann::json::array({p.invoker, p.root, p.offset}));
  }
  j["provenance"] = std::move(prov);
  j["truncated"] = rec.truncated;
  return j.dump();
}

inline SequenceRecord sequence_record_from_json_line(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    raise(errc::schema_violation, std::string("bad sequence record: ") + e.what());
  }
  if (!j.contains("id") || !j.contains("apis") || !j.contains("provenance") ||
      !j.contains("truncated")) {
    raise(errc::schema_violation, "sequence records need id/apis/provenance/truncated");
  }
  SequenceRecord rec;
  rec.id = j["id"].get<std::string>();
  if (j.contains("label") && !j["label"].is_null()) {
    std::string l = j["label"].get<std::string>();
    if (l == "malicious") rec.label = Label::Malicious;
    else if (l == "benign") rec.label = Label::Benign;
    else raise(errc::schema_violation, "unknown label '" + l + "'");
  }
  for (const auto& api : j["apis"]) rec.apis.push_back(api.get<std::string>());
  for (const auto& p : j["provenance"]) {
    if (!p.is_array() || p.size() != 3) {
      raise(errc::schema_violation, "provenance entries are [invoker, root, offset] triples");
    }
    rec.provenance.push_back(SequenceRecord::Prov{p[0].get<std::string>(),
                                                  p[1].get<std::string>(),
                                                  p[2].get<std::uint32_t>()});
  }
  if (rec.provenance.size() != rec.apis.size()) {
    raise(errc::schema_violation, "provenance and api list lengths differ");
  }
  rec.truncated = j["truncated"].get<bool>();
  return rec;
}

inline void write_sequence_dump(std::ostream& os, const std::vector<SequenceRecord>& records) {
  for (const auto& rec : records) os << sequence_record_to_json_line(rec) << "\n";
}

inline std::vector<SequenceRecord> read_sequence_dump(std::istream& is) {
  std::vector<SequenceRecord> records;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    records.push_back(sequence_record_from_json_line(line));
  }
  return records;
}

}  // namespace malseq

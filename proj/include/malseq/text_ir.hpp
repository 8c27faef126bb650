#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "malseq/dex_types.hpp"
#include "malseq/error.hpp"

namespace malseq {

// Splits a smali-style "Lpkg/Cls;->name(params)ret" signature.
inline MethodRef parse_signature(const std::string& sig) {
  auto arrow = sig.find("->");
  if (arrow == std::string::npos || arrow == 0) {
    raise(errc::unresolved_reference, "bad method signature '" + sig + "'");
  }
  MethodRef ref;
  ref.class_desc = sig.substr(0, arrow);
  if (ref.class_desc.front() != 'L' || ref.class_desc.back() != ';') {
    raise(errc::unresolved_reference, "bad class descriptor in '" + sig + "'");
  }
  auto paren = sig.find('(', arrow + 2);
  if (paren == std::string::npos || paren == arrow + 2 ||
      sig.find(')', paren) == std::string::npos) {
    raise(errc::unresolved_reference, "bad prototype in '" + sig + "'");
  }
  ref.name = sig.substr(arrow + 2, paren - arrow - 2);
  ref.proto = sig.substr(paren);
  return ref;
}

struct IrMethod {
  std::string class_desc;
  std::string name;
  std::string proto;
  std::vector<std::string> invokes;  // full signatures, in call order
};

inline std::string write_ir(const std::vector<IrMethod>& methods,
                            std::optional<Label> label) {
  nlohmann::json doc;
  doc["methods"] = nlohmann::json::array();
  for (const auto& m : methods) {
    nlohmann::json jm;
    jm["class"] = m.class_desc;
    jm["name"] = m.name;
    jm["proto"] = m.proto;
    jm["invokes"] = m.invokes;
    doc["methods"].push_back(std::move(jm));
  }
  doc["label"] = label ? nlohmann::json(label_name(*label)) : nlohmann::json(nullptr);
  return doc.dump();
}

// Loads the textual IR: a program reduced to its methods and their ordered
// invoke lists. Each invoke occupies one synthetic code unit, so offsets are
// list positions.
inline DexProgram load_ir(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    raise(errc::schema_violation, std::string("invalid json: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("methods") || !doc["methods"].is_array()) {
    raise(errc::schema_violation, "document must be an object with a 'methods' array");
  }

  DexProgram program;
  program.source = Source::TextIR;

  if (doc.contains("label") && !doc["label"].is_null()) {
    if (!doc["label"].is_string()) raise(errc::schema_violation, "label must be a string or null");
    std::string l = doc["label"].get<std::string>();
    if (l == "malicious") program.label = Label::Malicious;
    else if (l == "benign") program.label = Label::Benign;
    else raise(errc::schema_violation, "unknown label '" + l + "'");
  }

  std::unordered_map<std::string, std::uint32_t> ref_index;
  auto intern_ref = [&](MethodRef&& ref) -> std::uint32_t {
    std::string key = detail::ref_key(ref);
    auto it = ref_index.find(key);
    if (it != ref_index.end()) return it->second;
    std::uint32_t idx = static_cast<std::uint32_t>(program.method_refs.size());
    program.method_refs.push_back(std::move(ref));
    ref_index.emplace(std::move(key), idx);
    return idx;
  };

  // First pass declares every defined method so internal invokes resolve.
  struct Pending {
    std::uint32_t ref_index;
    std::vector<std::string> invokes;
  };
  std::vector<Pending> pending;
  for (const auto& jm : doc["methods"]) {
    if (!jm.is_object() || !jm.contains("class") || !jm.contains("name") ||
        !jm.contains("proto") || !jm.contains("invokes") || !jm["class"].is_string() ||
        !jm["name"].is_string() || !jm["proto"].is_string() || !jm["invokes"].is_array()) {
      raise(errc::schema_violation, "method entries need class/name/proto/invokes");
    }
    MethodRef ref;
    ref.class_desc = jm["class"].get<std::string>();
    ref.name = jm["name"].get<std::string>();
    ref.proto = jm["proto"].get<std::string>();
    if (ref.class_desc.empty() || ref.class_desc.front() != 'L' || ref.class_desc.back() != ';') {
      raise(errc::schema_violation, "bad class descriptor '" + ref.class_desc + "'");
    }
    if (ref.proto.empty() || ref.proto.front() != '(' ||
        ref.proto.find(')') == std::string::npos) {
      raise(errc::schema_violation, "bad proto '" + ref.proto + "'");
    }
    std::string key = detail::ref_key(ref);
    if (ref_index.count(key)) {
      raise(errc::duplicate_method_signature, key);
    }
    Pending p;
    p.ref_index = intern_ref(std::move(ref));
    for (const auto& inv : jm["invokes"]) {
      if (!inv.is_string()) raise(errc::schema_violation, "invokes must be strings");
      p.invokes.push_back(inv.get<std::string>());
    }
    pending.push_back(std::move(p));
  }

  for (auto& p : pending) {
    MethodDef def;
    def.ref_index = p.ref_index;
    def.insns_size = static_cast<std::uint32_t>(p.invokes.size());
    for (std::uint32_t i = 0; i < p.invokes.size(); ++i) {
      Instruction ins;
      ins.offset = i;
      ins.opcode = 0x6E;
      ins.width = 1;
      ins.invoke_target = intern_ref(parse_signature(p.invokes[i]));
      def.instructions.push_back(std::move(ins));
    }
    program.methods.push_back(std::move(def));
  }

  // Group defined methods by class for report rendering.
  std::unordered_map<std::string, std::uint32_t> class_index;
  for (std::uint32_t i = 0; i < program.methods.size(); ++i) {
    const std::string& desc = program.ref_of(program.methods[i]).class_desc;
    auto it = class_index.find(desc);
    if (it == class_index.end()) {
      it = class_index.emplace(desc, static_cast<std::uint32_t>(program.classes.size())).first;
      program.classes.push_back(ClassDef{desc, {}});
    }
    program.classes[it->second].method_def_indices.push_back(i);
  }

  std::set<std::string> type_set;
  for (const auto& ref : program.method_refs) type_set.insert(ref.class_desc);
  program.types.assign(type_set.begin(), type_set.end());

  detail::finalize_ref_kinds(program);
  return program;
}

}  // namespace malseq

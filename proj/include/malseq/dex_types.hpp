#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace malseq {

enum class Source { DexBinary, TextIR };
enum class Label { Malicious, Benign };

inline const char* label_name(Label l) {
  return l == Label::Malicious ? "malicious" : "benign";
}

// How a referenced method relates to the program under analysis.
//   Internal        defined in this file
//   ExternalApi     undefined, class descriptor under a platform API prefix
//   ExternalIgnored everything else (runtime library, third-party, java/...)
enum class RefKind { Internal, ExternalApi, ExternalIgnored };

struct MethodRef {
  std::string class_desc;  // e.g. "Landroid/telephony/SmsManager;"
  std::string name;        // e.g. "sendTextMessage"
  std::string proto;       // "(<param descriptors>)<return descriptor>"
  RefKind kind = RefKind::ExternalIgnored;

  std::string signature() const { return class_desc + "->" + name + proto; }
};

inline bool operator<(const MethodRef& a, const MethodRef& b) {
  if (a.class_desc != b.class_desc) return a.class_desc < b.class_desc;
  if (a.name != b.name) return a.name < b.name;
  return a.proto < b.proto;
}

// Invoke opcode ranges; the only instructions the pipeline interprets.
inline bool is_invoke_opcode(std::uint8_t op) {
  return (op >= 0x6E && op <= 0x72) || (op >= 0x74 && op <= 0x78);
}

inline const char* invoke_mnemonic(std::uint8_t op) {
  switch (op) {
    case 0x6E: return "invoke-virtual";
    case 0x6F: return "invoke-super";
    case 0x70: return "invoke-direct";
    case 0x71: return "invoke-static";
    case 0x72: return "invoke-interface";
    case 0x74: return "invoke-virtual/range";
    case 0x75: return "invoke-super/range";
    case 0x76: return "invoke-direct/range";
    case 0x77: return "invoke-static/range";
    case 0x78: return "invoke-interface/range";
  }
  return "invoke";
}

struct Instruction {
  std::uint32_t offset = 0;  // code-unit offset within the method body
  std::uint8_t opcode = 0;
  std::uint32_t width = 0;  // code units consumed
  std::optional<std::uint32_t> invoke_target;  // index into method_refs
};

struct MethodDef {
  std::uint32_t ref_index = 0;  // into DexProgram::method_refs
  std::uint32_t access_flags = 0;
  std::uint32_t insns_size = 0;  // code units in the decoded region
  std::vector<Instruction> instructions;
};

struct ClassDef {
  std::string descriptor;
  std::vector<std::uint32_t> method_def_indices;
};

struct DexProgram {
  Source source = Source::TextIR;
  std::string name;  // file stem or sample id; set by loaders
  std::optional<Label> label;

  std::vector<std::string> strings;
  std::vector<std::string> types;
  std::vector<MethodRef> method_refs;
  std::vector<MethodDef> methods;  // internal methods only
  std::vector<ClassDef> classes;

  // ref index -> method def index, or npos when external
  static constexpr std::uint32_t npos = 0xFFFFFFFFu;
  std::vector<std::uint32_t> def_of_ref;

  const MethodRef& ref_of(const MethodDef& def) const { return method_refs[def.ref_index]; }
  std::string method_signature(std::uint32_t def_index) const {
    return method_refs[methods[def_index].ref_index].signature();
  }
};

// Platform prefixes whose undefined references count as APIs. The full
// platform list additionally has java/ and javax/, which are excluded from
// analysis; anything not matching is ignored.
inline const std::array<std::string_view, 9>& api_prefixes() {
  static const std::array<std::string_view, 9> prefixes = {
      "android/",
      "com/android/internal/util/",
      "dalvik/",
      "org/apache/",
      "org/json/",
      "org/w3c/dom/",
      "org/xml/sax",
      "org/xmlpull/v1/",
      "junit/",
  };
  return prefixes;
}

inline bool has_api_prefix(std::string_view class_desc) {
  // "Lpkg/Cls;" -> "pkg/Cls;"
  if (class_desc.size() < 2 || class_desc.front() != 'L') return false;
  std::string_view body = class_desc.substr(1);
  for (std::string_view p : api_prefixes()) {
    if (body.substr(0, p.size()) == p) return true;
  }
  return false;
}

// Pure function of definition presence and class-descriptor prefix.
inline RefKind classify_method_ref(const MethodRef& ref, bool defined_in_program) {
  if (defined_in_program) return RefKind::Internal;
  if (has_api_prefix(ref.class_desc)) return RefKind::ExternalApi;
  return RefKind::ExternalIgnored;
}

namespace detail {

// Signature key for definition lookups.
inline std::string ref_key(const MethodRef& r) {
  return r.class_desc + "->" + r.name + r.proto;
}

// Fills def_of_ref and every ref's kind from the program's definitions.
inline void finalize_ref_kinds(DexProgram& program) {
  program.def_of_ref.assign(program.method_refs.size(), DexProgram::npos);
  for (std::uint32_t i = 0; i < program.methods.size(); ++i) {
    program.def_of_ref[program.methods[i].ref_index] = i;
  }
  for (std::uint32_t i = 0; i < program.method_refs.size(); ++i) {
    bool defined = program.def_of_ref[i] != DexProgram::npos;
    program.method_refs[i].kind = classify_method_ref(program.method_refs[i], defined);
  }
}

}  // namespace detail
}  // namespace malseq

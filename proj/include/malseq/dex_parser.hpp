#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "malseq/dex_types.hpp"
#include "malseq/error.hpp"

namespace malseq {
namespace dexdetail {

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t size() const { return bytes_.size(); }

  void require(std::uint64_t off, std::uint64_t len) const {
    if (off + len > bytes_.size() || off + len < off) {
      raise(errc::truncated_file, "read past end of file at offset " + std::to_string(off));
    }
  }

  std::uint8_t u8(std::uint64_t off) const {
    require(off, 1);
    return bytes_[off];
  }

  std::uint16_t u16(std::uint64_t off) const {
    require(off, 2);
    return static_cast<std::uint16_t>(bytes_[off] | (bytes_[off + 1] << 8));
  }

  std::uint32_t u32(std::uint64_t off) const {
    require(off, 4);
    return static_cast<std::uint32_t>(bytes_[off]) |
           (static_cast<std::uint32_t>(bytes_[off + 1]) << 8) |
           (static_cast<std::uint32_t>(bytes_[off + 2]) << 16) |
           (static_cast<std::uint32_t>(bytes_[off + 3]) << 24);
  }

  std::uint32_t uleb128(std::uint64_t& off) const {
    std::uint32_t result = 0;
    int shift = 0;
    for (int i = 0; i < 5; ++i) {
      std::uint8_t b = u8(off++);
      result |= static_cast<std::uint32_t>(b & 0x7F) << shift;
      if ((b & 0x80) == 0) return result;
      shift += 7;
    }
    raise(errc::malformed_header, "uleb128 longer than 5 bytes");
  }

 private:
  std::span<const std::uint8_t> bytes_;
};

// Instruction widths in 16-bit code units, indexed by opcode. Unassigned
// opcodes keep the single-unit placeholder format.
inline const std::uint8_t* opcode_widths() {
  static std::uint8_t table[256];
  static bool init = false;
  if (!init) {
    auto fill = [&](unsigned lo, unsigned hi, std::uint8_t w) {
      for (unsigned op = lo; op <= hi; ++op) table[op] = w;
    };
    fill(0x00, 0xFF, 1);
    fill(0x02, 0x02, 2); fill(0x03, 0x03, 3);
    fill(0x05, 0x05, 2); fill(0x06, 0x06, 3);
    fill(0x08, 0x08, 2); fill(0x09, 0x09, 3);
    fill(0x13, 0x13, 2); fill(0x14, 0x14, 3);
    fill(0x15, 0x17, 2);
    // 0x16 const-wide/16 is 2, 0x17 const-wide/32 is 3
    fill(0x17, 0x17, 3);
    fill(0x18, 0x18, 5); fill(0x19, 0x1A, 2);
    fill(0x1B, 0x1B, 3); fill(0x1C, 0x1C, 2);
    fill(0x1F, 0x20, 2);
    fill(0x22, 0x23, 2); fill(0x24, 0x26, 3);
    fill(0x29, 0x29, 2); fill(0x2A, 0x2C, 3);
    fill(0x2D, 0x3D, 2);
    fill(0x44, 0x51, 2); fill(0x52, 0x6D, 2);
    fill(0x6E, 0x72, 3); fill(0x74, 0x78, 3);
    fill(0x90, 0xAF, 2);
    fill(0xD0, 0xE2, 2);
    fill(0xFA, 0xFB, 4); fill(0xFC, 0xFD, 3);
    fill(0xFE, 0xFF, 2);
    init = true;
  }
  return table;
}

// Decodes one code region into instructions; widths must tile the region
// exactly. reader offsets are code units relative to insns_off (bytes).
inline std::vector<Instruction> decode_code(const Reader& r, std::uint64_t insns_off,
                                            std::uint32_t insns_size,
                                            std::uint32_t method_ref_count) {
  std::vector<Instruction> out;
  const std::uint8_t* widths = opcode_widths();
  std::uint32_t pos = 0;
  while (pos < insns_size) {
    std::uint64_t byte_off = insns_off + 2ull * pos;
    std::uint16_t unit0 = r.u16(byte_off);
    std::uint8_t op = static_cast<std::uint8_t>(unit0 & 0xFF);
    std::uint8_t ident = static_cast<std::uint8_t>(unit0 >> 8);
    std::uint32_t width = widths[op];

    if (op == 0x00 && ident != 0x00) {
      // switch / array payload pseudo-instructions
      if (ident == 0x01) {
        std::uint32_t size = r.u16(byte_off + 2);
        width = 4 + size * 2;
      } else if (ident == 0x02) {
        std::uint32_t size = r.u16(byte_off + 2);
        width = 2 + size * 4;
      } else if (ident == 0x03) {
        std::uint32_t element_width = r.u16(byte_off + 2);
        std::uint32_t size = r.u32(byte_off + 4);
        width = 4 + (static_cast<std::uint64_t>(size) * element_width + 1) / 2;
      } else {
        raise(errc::malformed_header,
              "unknown payload ident " + std::to_string(ident));
      }
    }

    if (pos + width > insns_size) {
      raise(errc::truncated_file, "instruction at code unit " + std::to_string(pos) +
                                      " overruns its code region");
    }

    Instruction ins;
    ins.offset = pos;
    ins.opcode = op;
    ins.width = width;
    if (is_invoke_opcode(op)) {
      std::uint16_t method_idx = r.u16(byte_off + 2);
      if (method_idx >= method_ref_count) {
        raise(errc::bad_index, "invoke target method index " + std::to_string(method_idx) +
                                   " out of range");
      }
      ins.invoke_target = method_idx;
    }
    out.push_back(ins);
    pos += width;
  }
  return out;
}

}  // namespace dexdetail

// Parses a DEX binary into a DexProgram. Only the structures the pipeline
// consumes are read: header, string/type/proto/method id tables, class_defs,
// class_data and code_items. Non-invoke instructions are decoded for width
// only.
inline DexProgram parse_dex(std::span<const std::uint8_t> bytes) {
  using dexdetail::Reader;
  Reader r(bytes);

  if (bytes.size() < 8 || std::memcmp(bytes.data(), "dex\n", 4) != 0 || bytes[7] != 0) {
    raise(errc::malformed_header, "missing dex magic");
  }
  int version = (bytes[4] - '0') * 100 + (bytes[5] - '0') * 10 + (bytes[6] - '0');
  if (bytes[4] < '0' || bytes[4] > '9' || bytes[5] < '0' || bytes[5] > '9' ||
      bytes[6] < '0' || bytes[6] > '9') {
    raise(errc::malformed_header, "non-numeric dex version");
  }
  if (version < 35 || version > 39) {
    raise(errc::unsupported_version, "dex version " + std::to_string(version));
  }
  if (bytes.size() < 0x70) {
    raise(errc::truncated_file, "file smaller than dex header");
  }

  std::uint32_t file_size = r.u32(0x20);
  std::uint32_t header_size = r.u32(0x24);
  std::uint32_t endian_tag = r.u32(0x28);
  if (endian_tag != 0x12345678u) {
    raise(errc::malformed_header, "unsupported endian tag");
  }
  if (header_size != 0x70) {
    raise(errc::malformed_header, "unexpected header size " + std::to_string(header_size));
  }
  if (file_size > bytes.size()) {
    raise(errc::truncated_file, "declared file size exceeds input");
  }
  if (file_size < bytes.size()) {
    raise(errc::malformed_header, "trailing bytes beyond declared file size");
  }

  std::uint32_t string_ids_size = r.u32(0x38), string_ids_off = r.u32(0x3C);
  std::uint32_t type_ids_size = r.u32(0x40), type_ids_off = r.u32(0x44);
  std::uint32_t proto_ids_size = r.u32(0x48), proto_ids_off = r.u32(0x4C);
  std::uint32_t method_ids_size = r.u32(0x58), method_ids_off = r.u32(0x5C);
  std::uint32_t class_defs_size = r.u32(0x60), class_defs_off = r.u32(0x64);

  DexProgram program;
  program.source = Source::DexBinary;

  // strings
  program.strings.reserve(string_ids_size);
  r.require(string_ids_off, 4ull * string_ids_size);
  for (std::uint32_t i = 0; i < string_ids_size; ++i) {
    std::uint64_t data_off = r.u32(string_ids_off + 4ull * i);
    std::uint32_t utf16_len = r.uleb128(data_off);
    (void)utf16_len;
    std::string s;
    for (;;) {
      std::uint8_t b = r.u8(data_off++);
      if (b == 0) break;
      s.push_back(static_cast<char>(b));
    }
    program.strings.push_back(std::move(s));
  }

  auto string_at = [&](std::uint32_t idx) -> const std::string& {
    if (idx >= program.strings.size()) raise(errc::bad_index, "string index " + std::to_string(idx));
    return program.strings[idx];
  };

  // types
  program.types.reserve(type_ids_size);
  r.require(type_ids_off, 4ull * type_ids_size);
  for (std::uint32_t i = 0; i < type_ids_size; ++i) {
    program.types.push_back(string_at(r.u32(type_ids_off + 4ull * i)));
  }

  auto type_at = [&](std::uint32_t idx) -> const std::string& {
    if (idx >= program.types.size()) raise(errc::bad_index, "type index " + std::to_string(idx));
    return program.types[idx];
  };

  // protos rendered as "(p1p2...)ret"
  std::vector<std::string> protos;
  protos.reserve(proto_ids_size);
  r.require(proto_ids_off, 12ull * proto_ids_size);
  for (std::uint32_t i = 0; i < proto_ids_size; ++i) {
    std::uint64_t base = proto_ids_off + 12ull * i;
    std::uint32_t return_type_idx = r.u32(base + 4);
    std::uint32_t parameters_off = r.u32(base + 8);
    std::string proto = "(";
    if (parameters_off != 0) {
      std::uint32_t count = r.u32(parameters_off);
      r.require(parameters_off + 4, 2ull * count);
      for (std::uint32_t j = 0; j < count; ++j) {
        proto += type_at(r.u16(parameters_off + 4 + 2ull * j));
      }
    }
    proto += ")";
    proto += type_at(return_type_idx);
    protos.push_back(std::move(proto));
  }

  // method refs
  program.method_refs.reserve(method_ids_size);
  r.require(method_ids_off, 8ull * method_ids_size);
  for (std::uint32_t i = 0; i < method_ids_size; ++i) {
    std::uint64_t base = method_ids_off + 8ull * i;
    MethodRef ref;
    ref.class_desc = type_at(r.u16(base));
    std::uint16_t proto_idx = r.u16(base + 2);
    if (proto_idx >= protos.size()) raise(errc::bad_index, "proto index " + std::to_string(proto_idx));
    ref.proto = protos[proto_idx];
    ref.name = string_at(r.u32(base + 4));
    program.method_refs.push_back(std::move(ref));
  }

  // class defs and their code
  std::vector<bool> seen_ref(method_ids_size, false);
  r.require(class_defs_off, 32ull * class_defs_size);
  for (std::uint32_t i = 0; i < class_defs_size; ++i) {
    std::uint64_t base = class_defs_off + 32ull * i;
    ClassDef cls;
    cls.descriptor = type_at(r.u32(base));
    std::uint32_t class_data_off = r.u32(base + 24);
    if (class_data_off != 0) {
      std::uint64_t p = class_data_off;
      std::uint32_t static_fields = r.uleb128(p);
      std::uint32_t instance_fields = r.uleb128(p);
      std::uint32_t direct_methods = r.uleb128(p);
      std::uint32_t virtual_methods = r.uleb128(p);
      for (std::uint32_t f = 0; f < static_fields + instance_fields; ++f) {
        r.uleb128(p);  // field_idx_diff
        r.uleb128(p);  // access_flags
      }
      std::uint32_t method_idx = 0;
      for (std::uint32_t m = 0; m < direct_methods + virtual_methods; ++m) {
        if (m == 0 || m == direct_methods) method_idx = 0;
        method_idx += r.uleb128(p);
        std::uint32_t access_flags = r.uleb128(p);
        std::uint32_t code_off = r.uleb128(p);
        if (method_idx >= method_ids_size) {
          raise(errc::bad_index, "encoded method index " + std::to_string(method_idx));
        }
        if (seen_ref[method_idx]) continue;  // duplicate definition; first wins
        seen_ref[method_idx] = true;

        MethodDef def;
        def.ref_index = method_idx;
        def.access_flags = access_flags;
        if (code_off != 0) {
          std::uint32_t insns_size = r.u32(code_off + 12);
          r.require(code_off + 16, 2ull * insns_size);
          def.insns_size = insns_size;
          def.instructions =
              dexdetail::decode_code(r, code_off + 16, insns_size, method_ids_size);
        }
        cls.method_def_indices.push_back(static_cast<std::uint32_t>(program.methods.size()));
        program.methods.push_back(std::move(def));
      }
    }
    program.classes.push_back(std::move(cls));
  }

  detail::finalize_ref_kinds(program);
  return program;
}

inline DexProgram parse_dex(const std::vector<std::uint8_t>& bytes) {
  return parse_dex(std::span<const std::uint8_t>(bytes.data(), bytes.size()));
}

}  // namespace malseq

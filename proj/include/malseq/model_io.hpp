#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "malseq/bilstm.hpp"
#include "malseq/error.hpp"
#include "malseq/skipgram.hpp"
#include "malseq/vocab.hpp"

namespace malseq {

inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

namespace iodetail {

inline void put_u32(std::string& out, std::uint32_t x) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((x >> (8 * i)) & 0xFF));
}

inline void put_u64(std::string& out, std::uint64_t x) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((x >> (8 * i)) & 0xFF));
}

inline void put_f64(std::string& out, double x) {
  std::uint64_t bits;
  std::memcpy(&bits, &x, 8);
  put_u64(out, bits);
}

class ByteReader {
 public:
  ByteReader(const std::string& bytes, const std::string& what)
      : bytes_(bytes), what_(what) {}

  void expect_magic(const char* magic) {
    if (bytes_.size() < pos_ + 4 || bytes_.compare(pos_, 4, magic) != 0) {
      raise(errc::model_mismatch, what_ + ": bad magic");
    }
    pos_ += 4;
  }

  std::uint32_t u32() {
    check(4);
    std::uint32_t x = 0;
    for (int i = 0; i < 4; ++i) x |= static_cast<std::uint32_t>(byte()) << (8 * i);
    return x;
  }

  std::uint64_t u64() {
    check(8);
    std::uint64_t x = 0;
    for (int i = 0; i < 8; ++i) x |= static_cast<std::uint64_t>(byte()) << (8 * i);
    return x;
  }

  double f64() {
    std::uint64_t bits = u64();
    double x;
    std::memcpy(&x, &bits, 8);
    return x;
  }

  std::string str(std::size_t len) {
    check(len);
    std::string s = bytes_.substr(pos_, len);
    pos_ += len;
    return s;
  }

  void done() {
    if (pos_ != bytes_.size()) raise(errc::model_mismatch, what_ + ": trailing bytes");
  }

 private:
  void check(std::size_t len) {
    if (pos_ + len > bytes_.size()) raise(errc::model_mismatch, what_ + ": truncated");
  }
  unsigned char byte() { return static_cast<unsigned char>(bytes_[pos_++]); }

  const std::string& bytes_;
  std::string what_;
  std::size_t pos_ = 0;
};

}  // namespace iodetail

// Versioned little-endian containers. The embedding file records the hash of
// the vocabulary it was trained against, and the model file records both, so
// a scan can refuse mixed artifacts.

inline std::string serialize_vocab(const ApiVocab& vocab) {
  std::string out = "MSQV";
  iodetail::put_u32(out, 1);
  iodetail::put_u64(out, vocab.size());
  for (std::uint32_t i = 0; i < vocab.size(); ++i) {
    iodetail::put_u32(out, static_cast<std::uint32_t>(vocab.api_of[i].size()));
    out += vocab.api_of[i];
    iodetail::put_f64(out, vocab.freq[i].malicious);
    iodetail::put_f64(out, vocab.freq[i].benign);
    iodetail::put_f64(out, vocab.freq[i].all);
    out.push_back(vocab.filtered[i] ? 1 : 0);
  }
  return out;
}

inline ApiVocab deserialize_vocab(const std::string& bytes) {
  iodetail::ByteReader r(bytes, "vocabulary file");
  r.expect_magic("MSQV");
  if (r.u32() != 1) raise(errc::model_mismatch, "vocabulary file: unsupported version");
  std::uint64_t l = r.u64();
  ApiVocab vocab;
  for (std::uint64_t i = 0; i < l; ++i) {
    std::uint32_t len = r.u32();
    std::string api = r.str(len);
    ApiFrequency f;
    f.malicious = r.f64();
    f.benign = r.f64();
    f.all = r.f64();
    bool filtered = r.str(1)[0] != 0;
    vocab.index.emplace(api, static_cast<std::uint32_t>(vocab.api_of.size()));
    vocab.api_of.push_back(std::move(api));
    vocab.freq.push_back(f);
    vocab.filtered.push_back(filtered);
  }
  r.done();
  return vocab;
}

inline std::string serialize_embedding(const EmbeddingMatrix& emb, std::uint64_t vocab_hash) {
  std::string out = "MSQE";
  iodetail::put_u32(out, 1);
  iodetail::put_u64(out, emb.l);
  iodetail::put_u64(out, emb.v);
  iodetail::put_u64(out, vocab_hash);
  for (double x : emb.w) iodetail::put_f64(out, x);
  return out;
}

struct EmbeddingFile {
  EmbeddingMatrix embedding;
  std::uint64_t vocab_hash = 0;
};

inline EmbeddingFile deserialize_embedding(const std::string& bytes) {
  iodetail::ByteReader r(bytes, "embedding file");
  r.expect_magic("MSQE");
  if (r.u32() != 1) raise(errc::model_mismatch, "embedding file: unsupported version");
  EmbeddingFile out;
  out.embedding.l = static_cast<std::uint32_t>(r.u64());
  out.embedding.v = static_cast<std::uint32_t>(r.u64());
  out.vocab_hash = r.u64();
  const std::size_t count =
      static_cast<std::size_t>(out.embedding.l) * out.embedding.v;
  out.embedding.w.resize(count);
  for (std::size_t i = 0; i < count; ++i) out.embedding.w[i] = r.f64();
  r.done();
  return out;
}

inline std::string serialize_model(const DetectionModel& model, std::uint64_t vocab_hash,
                                   std::uint64_t emb_hash) {
  std::string out = "MSQM";
  iodetail::put_u32(out, 1);
  iodetail::put_u32(out, model.v);
  iodetail::put_u32(out, model.H);
  iodetail::put_u32(out, model.L);
  iodetail::put_u64(out, model.seed);
  iodetail::put_u64(out, vocab_hash);
  iodetail::put_u64(out, emb_hash);
  iodetail::put_u64(out, model.params.size());
  for (double x : model.params) iodetail::put_f64(out, x);
  return out;
}

struct ModelFile {
  DetectionModel model;
  std::uint64_t vocab_hash = 0;
  std::uint64_t emb_hash = 0;
};

inline ModelFile deserialize_model(const std::string& bytes) {
  iodetail::ByteReader r(bytes, "model file");
  r.expect_magic("MSQM");
  if (r.u32() != 1) raise(errc::model_mismatch, "model file: unsupported version");
  ModelFile out;
  out.model.v = r.u32();
  out.model.H = r.u32();
  out.model.L = r.u32();
  out.model.seed = r.u64();
  out.vocab_hash = r.u64();
  out.emb_hash = r.u64();
  std::uint64_t count = r.u64();
  if (count != out.model.param_count()) {
    raise(errc::model_mismatch, "model file: parameter count does not match dimensions");
  }
  out.model.params.resize(count);
  for (std::uint64_t i = 0; i < count; ++i) out.model.params[i] = r.f64();
  r.done();
  return out;
}

inline void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream os(path, std::ios::binary);
  if (!os) raise(errc::model_mismatch, "cannot write '" + path + "'");
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) raise(errc::model_mismatch, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace malseq

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>

#include "malseq/bilstm.hpp"
#include "malseq/error.hpp"
#include "malseq/extraction.hpp"
#include "malseq/rng.hpp"
#include "malseq/skipgram.hpp"
#include "malseq/synthetic.hpp"
#include "malseq/vocab.hpp"

namespace malseq {

// Seed streams derived from the top-level seed, one per randomized stage.
enum class SeedStream : std::uint64_t {
  Corpus = 1,
  SkipGram = 2,
  Classifier = 3,
  ModelInit = 4,
  Split = 5,
};

inline std::uint64_t stream_seed(std::uint64_t seed, SeedStream stream) {
  return mix_seed(seed, static_cast<std::uint64_t>(stream));
}

struct PipelineConfig {
  std::uint64_t seed = 42;
  std::string model_dir = "models";
  std::string report_dir = "reports";

  ExtractionConfig extraction;  // max_len 200000, memo_cap 50000

  double vocab_threshold = 0.75;
  FilterRule filter_rule = FilterRule::AllClasses;

  SkipGramConfig skipgram;  // dim 200, window 5, negatives 5, epochs 5, lr 0.025

  std::uint32_t hidden = 128;
  TrainConfig classifier;  // epochs 30, batch 16, lr 1e-3

  std::uint32_t k = 200;
  std::uint32_t top_n = 9;

  std::array<double, 3> split_ratios = {0.8, 0.1, 0.1};

  SyntheticSpec corpus = default_synthetic_spec();
  std::uint32_t corpus_count = 2000;
  double malicious_fraction = 0.5;

  std::string format = "text";  // "text" | "json"
  bool skip_errors = false;
};

namespace cfgdetail {

// key/value subset of TOML: [section] headers, key = value lines, # comments,
// quoted strings, bare numbers and booleans.
inline std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream is(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos && line.find('"') == std::string::npos) {
      line = line.substr(0, hash);
    }
    auto strip = [](const std::string& s) {
      auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    line = strip(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        raise(errc::schema_violation, "config line " + std::to_string(line_no) + ": bad section");
      }
      section = strip(line.substr(1, line.size() - 2));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      raise(errc::schema_violation, "config line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = strip(line.substr(0, eq));
    std::string value = strip(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      raise(errc::schema_violation, "config line " + std::to_string(line_no) + ": empty key or value");
    }
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    out[section.empty() ? key : section + "." + key] = value;
  }
  return out;
}

inline double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    double x = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return x;
  } catch (const std::exception&) {
    raise(errc::schema_violation, "config key '" + key + "': '" + value + "' is not a number");
  }
}

inline std::uint64_t to_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    unsigned long long x = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return x;
  } catch (const std::exception&) {
    raise(errc::schema_violation, "config key '" + key + "': '" + value + "' is not an integer");
  }
}

inline bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  raise(errc::schema_violation, "config key '" + key + "': expected true or false");
}

}  // namespace cfgdetail

// Applies a parsed config document over the defaults. Unknown keys are
// rejected so typos surface immediately.
inline void apply_config_text(PipelineConfig& cfg, const std::string& text) {
  using namespace cfgdetail;
  auto kv = parse_key_values(text);
  for (const auto& [key, value] : kv) {
    if (key == "seed") cfg.seed = to_u64(key, value);
    else if (key == "paths.model_dir") cfg.model_dir = value;
    else if (key == "paths.report_dir") cfg.report_dir = value;
    else if (key == "extraction.max_len") cfg.extraction.max_len = to_u64(key, value);
    else if (key == "extraction.memo_cap") cfg.extraction.memo_cap = to_u64(key, value);
    else if (key == "vocab.threshold") cfg.vocab_threshold = to_double(key, value);
    else if (key == "vocab.filter_all_classes")
      cfg.filter_rule = to_bool(key, value) ? FilterRule::AllClasses : FilterRule::AnyClass;
    else if (key == "skipgram.dim") cfg.skipgram.dim = static_cast<std::uint32_t>(to_u64(key, value));
    else if (key == "skipgram.window") cfg.skipgram.window = static_cast<std::uint32_t>(to_u64(key, value));
    else if (key == "skipgram.negatives") cfg.skipgram.negatives = static_cast<std::uint32_t>(to_u64(key, value));
    else if (key == "skipgram.epochs") cfg.skipgram.epochs = static_cast<std::uint32_t>(to_u64(key, value));
    else if (key == "skipgram.lr") cfg.skipgram.lr = to_double(key, value);
    else if (key == "classifier.hidden") cfg.hidden = static_cast<std::uint32_t>(to_u64(key, value));
    else if (key == "classifier.epochs") cfg.classifier.epochs = static_cast<std::uint32_t>(to_u64(key, value));
    else if (key == "classifier.batch") cfg.classifier.batch = static_cast<std::uint32_t>(to_u64(key, value));
    else if (key == "classifier.lr") cfg.classifier.lr = to_double(key, value);
    else if (key == "localization.k") cfg.k = static_cast<std::uint32_t>(to_u64(key, value));
    else if (key == "localization.top_n") cfg.top_n = static_cast<std::uint32_t>(to_u64(key, value));
    else if (key == "split.train") cfg.split_ratios[0] = to_double(key, value);
    else if (key == "split.validation") cfg.split_ratios[1] = to_double(key, value);
    else if (key == "split.test") cfg.split_ratios[2] = to_double(key, value);
    else if (key == "corpus.count") cfg.corpus_count = static_cast<std::uint32_t>(to_u64(key, value));
    else if (key == "corpus.malicious_fraction") cfg.malicious_fraction = to_double(key, value);
    else if (key == "corpus.min_methods") cfg.corpus.min_methods = static_cast<std::uint32_t>(to_u64(key, value));
    else if (key == "corpus.max_methods") cfg.corpus.max_methods = static_cast<std::uint32_t>(to_u64(key, value));
    else if (key == "corpus.min_invokes") cfg.corpus.min_invokes = static_cast<std::uint32_t>(to_u64(key, value));
    else if (key == "corpus.max_invokes") cfg.corpus.max_invokes = static_cast<std::uint32_t>(to_u64(key, value));
    else if (key == "corpus.planted_methods") cfg.corpus.planted_methods = static_cast<std::uint32_t>(to_u64(key, value));
    else if (key == "corpus.recursion_probability") cfg.corpus.recursion_probability = to_double(key, value);
    else if (key == "corpus.extra_edge_probability") cfg.corpus.extra_edge_probability = to_double(key, value);
    else if (key == "corpus.max_sequence_len") cfg.corpus.max_sequence_len = static_cast<std::uint32_t>(to_u64(key, value));
    else if (key == "output.format") {
      if (value != "text" && value != "json") {
        raise(errc::schema_violation, "output.format must be text or json");
      }
      cfg.format = value;
    } else if (key == "output.skip_errors") cfg.skip_errors = to_bool(key, value);
    else raise(errc::schema_violation, "unknown config key '" + key + "'");
  }
}

}  // namespace malseq

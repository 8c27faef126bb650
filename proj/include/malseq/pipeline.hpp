#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "malseq/bilstm.hpp"
#include "malseq/call_graph.hpp"
#include "malseq/config.hpp"
#include "malseq/dex_parser.hpp"
#include "malseq/extraction.hpp"
#include "malseq/localization.hpp"
#include "malseq/metrics.hpp"
#include "malseq/model_io.hpp"
#include "malseq/report.hpp"
#include "malseq/sequence_io.hpp"
#include "malseq/skipgram.hpp"
#include "malseq/synthetic.hpp"
#include "malseq/text_ir.hpp"
#include "malseq/vectorize.hpp"
#include "malseq/vocab.hpp"

namespace malseq {

// Loads a .dex binary or a textual IR document, setting the program name
// from the file stem.
inline DexProgram load_program_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) raise(errc::truncated_file, "cannot open '" + path.string() + "'");
  std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  DexProgram program;
  if (path.extension() == ".dex") {
    program = parse_dex(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
  } else {
    program = load_ir(bytes);
  }
  program.name = path.stem().string();
  return program;
}

struct ExtractedProgram {
  DexProgram program;
  CallGraph graph;
  BehaviorSequence sequence;
  TraversalStats stats;
};

inline ExtractedProgram extract_program(DexProgram program, const ExtractionConfig& config) {
  ExtractedProgram out;
  out.graph = build_cross_reference(program);
  auto [seq, stats] = extract_sequence(program, out.graph, config);
  out.program = std::move(program);
  out.sequence = std::move(seq);
  out.stats = stats;
  return out;
}

// ---------------------------------------------------------------------------
// corpus generation

struct GeneratedCorpus {
  std::vector<ManifestEntry> manifest;
};

inline GeneratedCorpus generate_corpus(const std::filesystem::path& out_dir,
                                       const PipelineConfig& cfg) {
  std::filesystem::create_directories(out_dir);
  GeneratedCorpus corpus;
  const std::uint64_t base_seed = stream_seed(cfg.seed, SeedStream::Corpus);
  const std::uint32_t malicious_count =
      static_cast<std::uint32_t>(cfg.corpus_count * cfg.malicious_fraction + 0.5);
  std::ofstream manifest(out_dir / "manifest.jsonl");
  for (std::uint32_t i = 0; i < cfg.corpus_count; ++i) {
    Label label = i < malicious_count ? Label::Malicious : Label::Benign;
    Rng rng(mix_seed(base_seed, i));
    SyntheticProgram prog = generate_synthetic_program(cfg.corpus, label, rng);
    char name[32];
    std::snprintf(name, sizeof(name), "sample_%05u", i);
    std::string file = std::string(name) + ".json";
    std::ofstream os(out_dir / file);
    os << prog.ir_json << "\n";
    ManifestEntry entry;
    entry.id = name;
    entry.label = label;
    entry.path = file;
    entry.planted = prog.planted;
    manifest << manifest_to_json_line(entry) << "\n";
    corpus.manifest.push_back(std::move(entry));
  }
  return corpus;
}

inline std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) raise(errc::truncated_file, "cannot open manifest '" + path.string() + "'");
  std::vector<ManifestEntry> entries;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty()) entries.push_back(manifest_from_json_line(line));
  }
  return entries;
}

// ---------------------------------------------------------------------------
// training

struct TrainItem {
  std::string id;
  std::vector<std::string> apis;
  Label label = Label::Benign;
};

struct TrainedBundle {
  ApiVocab vocab;
  EmbeddingMatrix embedding;
  DetectionModel model;
};

struct TrainOutcome {
  TrainedBundle bundle;
  std::vector<double> skipgram_loss;
  std::vector<double> classifier_loss;
  std::optional<EvalMetrics> validation;
};

// stats -> vocab -> skip-gram -> vectorize -> classifier, with a stratified
// train/validation/test split. The input layer size L is the longest
// filtered training sequence.
inline TrainOutcome train_pipeline(const std::vector<TrainItem>& items,
                                   const PipelineConfig& cfg, std::ostream* log = nullptr) {
  if (items.empty()) raise(errc::empty_corpus, "training corpus is empty");
  std::vector<Label> labels;
  labels.reserve(items.size());
  for (const auto& it : items) labels.push_back(it.label);

  auto splits = split_dataset(labels, cfg.split_ratios, stream_seed(cfg.seed, SeedStream::Split));
  const auto& train_idx = splits[0];
  const auto& val_idx = splits[1];
  if (train_idx.empty()) raise(errc::empty_corpus, "training split is empty");

  std::vector<std::vector<std::string>> train_apis;
  std::vector<Label> train_labels;
  train_apis.reserve(train_idx.size());
  for (std::size_t i : train_idx) {
    train_apis.push_back(items[i].apis);
    train_labels.push_back(items[i].label);
  }

  auto stats = api_frequency_stats(train_apis, train_labels);
  ApiVocab vocab = build_vocab(stats, cfg.vocab_threshold, cfg.filter_rule);

  SkipGramConfig sg = cfg.skipgram;
  sg.seed = stream_seed(cfg.seed, SeedStream::SkipGram);
  SkipGramResult sgr = train_skipgram(train_apis, vocab, sg);

  std::uint32_t L = 0;
  for (const auto& apis : train_apis) {
    std::uint32_t live = 0;
    for (const auto& api : apis) {
      auto idx = vocab.lookup(api);
      if (idx && vocab.filtered[*idx]) continue;
      ++live;
    }
    L = std::max(L, live);
  }
  if (L == 0) raise(errc::empty_corpus, "all training sequences are empty after filtering");

  auto vectorize_items = [&](const std::vector<std::size_t>& idx) {
    std::vector<LabeledInput> set;
    set.reserve(idx.size());
    for (std::size_t i : idx) {
      set.push_back(LabeledInput{vectorize(items[i].apis, vocab, sgr.embedding, L),
                                 items[i].label});
    }
    return set;
  };
  std::vector<LabeledInput> train_set = vectorize_items(train_idx);

  DetectionModel model = init_detection_model(sgr.embedding.v, cfg.hidden, L,
                                              stream_seed(cfg.seed, SeedStream::ModelInit));
  TrainConfig tc = cfg.classifier;
  tc.seed = stream_seed(cfg.seed, SeedStream::Classifier);
  if (log) {
    *log << "training: " << train_set.size() << " samples, vocab " << vocab.size() << ", L=" << L
         << ", v=" << sgr.embedding.v << ", H=" << cfg.hidden << "\n";
  }
  std::vector<double> history = train(model, train_set, tc);
  if (log) {
    for (std::size_t e = 0; e < history.size(); ++e) {
      *log << "epoch " << (e + 1) << ": loss " << history[e] << "\n";
    }
  }

  TrainOutcome outcome;
  outcome.bundle = TrainedBundle{std::move(vocab), std::move(sgr.embedding), std::move(model)};
  outcome.skipgram_loss = std::move(sgr.epoch_loss);
  outcome.classifier_loss = std::move(history);

  if (!val_idx.empty()) {
    std::vector<PredictionOutcome> outcomes;
    for (std::size_t i : val_idx) {
      PaddedVectorSequence pv =
          vectorize(items[i].apis, outcome.bundle.vocab, outcome.bundle.embedding, L);
      Prediction pred = predict(outcome.bundle.model, pv);
      outcomes.push_back(PredictionOutcome{items[i].id, items[i].label, pred.label});
    }
    outcome.validation = compute_metrics(outcomes);
    if (log) {
      *log << "validation: accuracy " << outcome.validation->accuracy << ", f1 "
           << outcome.validation->f1 << ", fpr " << outcome.validation->fpr << "\n";
    }
  }
  return outcome;
}

// ---------------------------------------------------------------------------
// bundle files

struct BundleFiles {
  std::string vocab = "vocab.bin";
  std::string embedding = "embedding.bin";
  std::string model = "model.bin";
};

inline void save_bundle(const std::filesystem::path& dir, const TrainedBundle& bundle) {
  std::filesystem::create_directories(dir);
  BundleFiles files;
  std::string vocab_bytes = serialize_vocab(bundle.vocab);
  std::uint64_t vocab_hash = fnv1a64(vocab_bytes);
  std::string emb_bytes = serialize_embedding(bundle.embedding, vocab_hash);
  std::uint64_t emb_hash = fnv1a64(emb_bytes);
  std::string model_bytes = serialize_model(bundle.model, vocab_hash, emb_hash);
  write_file((dir / files.vocab).string(), vocab_bytes);
  write_file((dir / files.embedding).string(), emb_bytes);
  write_file((dir / files.model).string(), model_bytes);
}

inline TrainedBundle load_bundle(const std::filesystem::path& dir) {
  BundleFiles files;
  std::string vocab_bytes = read_file((dir / files.vocab).string());
  std::string emb_bytes = read_file((dir / files.embedding).string());
  std::string model_bytes = read_file((dir / files.model).string());
  std::uint64_t vocab_hash = fnv1a64(vocab_bytes);
  std::uint64_t emb_hash = fnv1a64(emb_bytes);

  TrainedBundle bundle;
  bundle.vocab = deserialize_vocab(vocab_bytes);
  EmbeddingFile ef = deserialize_embedding(emb_bytes);
  ModelFile mf = deserialize_model(model_bytes);
  if (ef.vocab_hash != vocab_hash || mf.vocab_hash != vocab_hash || mf.emb_hash != emb_hash) {
    raise(errc::model_mismatch, "model, embedding and vocabulary files are from different runs");
  }
  if (ef.embedding.l != bundle.vocab.size() || mf.model.v != ef.embedding.v) {
    raise(errc::model_mismatch, "artifact dimensions disagree");
  }
  bundle.embedding = std::move(ef.embedding);
  bundle.model = std::move(mf.model);
  return bundle;
}

// ---------------------------------------------------------------------------
// scanning and evaluation

struct ScanOutcome {
  Prediction prediction;
  ExtractedProgram extracted;
  std::vector<MethodSuspicion> scores;  // all scored methods, best first
  std::optional<Report> report;         // present for malicious verdicts
};

inline ScanOutcome scan_program(const TrainedBundle& bundle, DexProgram program,
                                const PipelineConfig& cfg) {
  ScanOutcome out;
  out.extracted = extract_program(std::move(program), cfg.extraction);
  PaddedVectorSequence pv =
      vectorize(out.extracted.sequence, bundle.vocab, bundle.embedding, bundle.model.L);
  out.prediction = predict(bundle.model, pv);
  if (out.prediction.label == Label::Malicious && out.extracted.sequence.size() > 0) {
    auto suspects = top_k_suspects(out.prediction.trace, out.extracted.sequence, cfg.k);
    out.scores = suspect_scores(suspects, out.extracted.program);
    auto top = select_methods(out.scores, cfg.top_n);
    out.report = generate_report(out.extracted.program, out.extracted.sequence,
                                 out.prediction.trace, suspects, top,
                                 ReportConfig{cfg.k, cfg.top_n});
  }
  return out;
}

struct EvalItem {
  std::string id;
  DexProgram program;
  Label label = Label::Benign;
  std::set<std::string> planted;  // ground truth for malicious samples
};

struct SweepPoint {
  std::uint32_t n = 0;
  double hit_rate = 0.0;
  double accuracy = 0.0;
};

struct EvalOutcome {
  EvalMetrics detection;
  std::optional<LocalizationMetrics> localization;
  std::vector<SweepPoint> sweep;
  std::vector<NMaxApi> n_max;
};

// Detection metrics over every item; localization over the truly-malicious
// ones, using each sample's ranked method scores.
inline EvalOutcome eval_corpus(const TrainedBundle& bundle, std::vector<EvalItem> items,
                               const PipelineConfig& cfg, std::uint32_t sweep_to = 0,
                               std::uint32_t nmax_count = 5) {
  EvalOutcome out;
  std::vector<PredictionOutcome> outcomes;
  std::map<std::string, std::vector<std::string>> ranked;  // malicious truth only
  std::map<std::string, std::set<std::string>> truth;
  std::vector<std::pair<AttentionTrace, BehaviorSequence>> mal_traces;

  for (auto& item : items) {
    ExtractedProgram ex = extract_program(std::move(item.program), cfg.extraction);
    PaddedVectorSequence pv =
        vectorize(ex.sequence, bundle.vocab, bundle.embedding, bundle.model.L);
    Prediction pred = predict(bundle.model, pv);
    outcomes.push_back(PredictionOutcome{item.id, item.label, pred.label});
    if (item.label == Label::Malicious) {
      if (item.planted.empty()) {
        raise(errc::misaligned_sets, "no ground truth for malicious sample '" + item.id + "'");
      }
      auto suspects = top_k_suspects(pred.trace, ex.sequence, cfg.k);
      auto scores = suspect_scores(suspects, ex.program);
      std::vector<std::string> sigs;
      for (const auto& m : scores) sigs.push_back(m.signature);
      ranked.emplace(item.id, std::move(sigs));
      truth.emplace(item.id, item.planted);
      mal_traces.emplace_back(std::move(pred.trace), std::move(ex.sequence));
    }
  }

  out.detection = compute_metrics(outcomes);

  if (!ranked.empty()) {
    auto top_n_of = [&](std::uint32_t n) {
      std::map<std::string, std::vector<std::string>> cut;
      for (const auto& [id, sigs] : ranked) {
        std::vector<std::string> head(sigs.begin(),
                                      sigs.begin() + std::min<std::size_t>(sigs.size(), n));
        cut.emplace(id, std::move(head));
      }
      return cut;
    };
    out.localization = localization_metrics(top_n_of(cfg.top_n), truth, cfg.top_n);
    for (std::uint32_t n = 1; n <= sweep_to; ++n) {
      auto m = localization_metrics(top_n_of(n), truth, n);
      out.sweep.push_back(SweepPoint{n, m.hit_rate, m.accuracy});
    }
    std::vector<std::pair<const AttentionTrace*, const BehaviorSequence*>> refs;
    refs.reserve(mal_traces.size());
    for (const auto& [trace, seq] : mal_traces) refs.emplace_back(&trace, &seq);
    out.n_max = n_max_apis(refs, cfg.k, nmax_count);
  }
  return out;
}

}  // namespace malseq

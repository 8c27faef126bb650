#pragma once

#include <stdexcept>
#include <string>

namespace malseq {

// One code per contract failure surfaced by the library. CLI maps these to
// exit codes; tests match on them.
enum class errc {
  // dex / ir parsing
  malformed_header,
  truncated_file,
  bad_index,
  unsupported_version,
  schema_violation,
  duplicate_method_signature,
  unresolved_reference,
  // vocabulary / embedding
  empty_corpus,
  zero_dimension,
  // classifier
  single_class_dataset,
  non_finite_loss,
  dimension_mismatch,
  // localization
  provenance_mismatch,
  empty_set,
  // synthetic corpus / metrics
  infeasible_spec,
  empty_predictions,
  misaligned_sets,
  bad_ratios,
  // model files
  model_mismatch,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::malformed_header: return "MalformedHeader";
    case errc::truncated_file: return "TruncatedFile";
    case errc::bad_index: return "BadIndex";
    case errc::unsupported_version: return "UnsupportedVersion";
    case errc::schema_violation: return "SchemaViolation";
    case errc::duplicate_method_signature: return "DuplicateMethodSignature";
    case errc::unresolved_reference: return "UnresolvedReference";
    case errc::empty_corpus: return "EmptyCorpus";
    case errc::zero_dimension: return "ZeroDimension";
    case errc::single_class_dataset: return "SingleClassDataset";
    case errc::non_finite_loss: return "NonFiniteLoss";
    case errc::dimension_mismatch: return "DimensionMismatch";
    case errc::provenance_mismatch: return "ProvenanceMismatch";
    case errc::empty_set: return "EmptySet";
    case errc::infeasible_spec: return "InfeasibleSpec";
    case errc::empty_predictions: return "EmptyPredictions";
    case errc::misaligned_sets: return "MisalignedSets";
    case errc::bad_ratios: return "BadRatios";
    case errc::model_mismatch: return "ModelMismatch";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace malseq

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "spamclf/classical.hpp"
#include "spamclf/embedding.hpp"
#include "spamclf/neural.hpp"
#include "spamclf/preprocess.hpp"

namespace spamclf {

enum class ModelKind { gnb, logreg, svm, lstm };

std::string_view to_string(ModelKind kind);
std::optional<ModelKind> parse_model_kind(std::string_view text);
// Short and long names used in comparison tables ("SVM", "SVM - Linear Kernel").
std::string_view display_name(ModelKind kind);
std::string_view type_name(ModelKind kind);

using ModelParams = std::variant<GaussianNbModel, LogRegModel, LinearSvmModel, LstmParams>;

// A trained model plus everything needed to score raw text with the exact
// training-time preprocessing.
struct ModelArtifact {
  static constexpr int kFormatVersion = 1;

  ModelParams model;
  Vocabulary vocabulary;
  // Word2Vec table for the classical models; empty for the LSTM.
  EmbeddingMatrix embedding;
  std::size_t max_len = kMaxSequenceLength;
  StopwordList stopwords;
  nlohmann::json config = nlohmann::json::object();
  std::string dataset_fingerprint;
  double train_seconds = 0.0;

  ModelKind kind() const;
};

// Container layout:
//   8 bytes   magic "SPAMCLF1"
//   8 bytes   header length N, unsigned little-endian
//   N bytes   JSON header: format_version, model_kind, dim, arrays
//             [{name, shape}], payload_bytes, payload_checksum
//             (FNV-1a 64, hex), vocabulary, stopwords, config echo,
//             dataset fingerprint, train_seconds
//   payload   every array as little-endian IEEE-754 binary64, in header order
std::string serialize_artifact(const ModelArtifact& artifact);
// Throws DataError on a bad magic, version, checksum or shape.
ModelArtifact deserialize_artifact(std::string_view bytes);

void save_artifact(const ModelArtifact& artifact, const std::filesystem::path& path);
ModelArtifact load_artifact(const std::filesystem::path& path);

// Scores already-preprocessed documents.
std::vector<Prediction> predict_documents(const ModelArtifact& artifact, const std::vector<TokenSequence>& docs);

// Preprocesses raw text with the artifact's stopword snapshot, then scores it.
Prediction predict_text(const ModelArtifact& artifact, std::string_view raw);

}  // namespace spamclf

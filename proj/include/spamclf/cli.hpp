#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "spamclf/artifact.hpp"
#include "spamclf/config.hpp"
#include "spamclf/eval.hpp"

namespace spamclf::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumeric = 3;

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// File layout under the --out directory.
struct RunPaths {
  explicit RunPaths(const std::filesystem::path& root);

  std::filesystem::path root;
  std::filesystem::path prepared;
  std::filesystem::path records;          // prepared/records.tsv
  std::filesystem::path manifest;         // prepared/split.txt
  std::filesystem::path vocab_classical;  // prepared/vocab_classical.tsv
  std::filesystem::path vocab_lstm;       // prepared/vocab_lstm.tsv
  std::filesystem::path config;           // prepared/config.json
  std::filesystem::path models;
  std::filesystem::path logs;
  std::filesystem::path metrics_log;      // logs/metrics.jsonl
  std::filesystem::path reports;

  std::filesystem::path artifact(ModelKind kind) const;
};

struct PreparedRecord {
  std::size_t source_index = 0;
  Label label = Label::ham;
  TokenSequence tokens;
};

struct PreparedData {
  std::vector<PreparedRecord> train;
  std::vector<PreparedRecord> test;
};

// Hash of the training records (indices, labels, tokens).
std::string dataset_fingerprint(const std::vector<PreparedRecord>& records);

// Reads records.tsv and splits it by the manifest (default: the prepared one).
PreparedData load_prepared(const RunPaths& paths, const std::optional<std::filesystem::path>& manifest = {});

// Append-only JSON-lines log, one object per line with timestamp and run id.
class MetricsLog {
 public:
  MetricsLog(std::filesystem::path path, std::string run_id);

  void write(const std::string& event, nlohmann::json fields, std::optional<std::size_t> epoch = {});
  std::size_t lines_written() const { return lines_; }
  const std::string& run_id() const { return run_id_; }

 private:
  std::filesystem::path path_;
  std::string run_id_;
  std::size_t lines_ = 0;
};

struct PrepareSummary {
  std::size_t raw = 0;
  std::size_t dropped = 0;
  std::size_t clean = 0;
  std::size_t train = 0;
  std::size_t test = 0;
  std::size_t vocab_classical = 0;
  std::size_t vocab_lstm = 0;
};

PrepareSummary cmd_prepare(const RunConfig& config, std::ostream& out);

// Trains one model on the training records. Logs to `log` when given.
ModelArtifact train_model(const RunConfig& config, ModelKind kind, const std::vector<PreparedRecord>& train,
                          MetricsLog* log = nullptr);

struct TrainSummary {
  std::filesystem::path artifact;
  double train_seconds = 0.0;
  std::size_t log_lines = 0;
};

TrainSummary cmd_train(const RunConfig& config, ModelKind kind, std::ostream& out);

MetricsReport cmd_evaluate(const RunConfig& config, const std::filesystem::path& artifact,
                           const std::optional<std::filesystem::path>& manifest, std::ostream& out);

std::vector<ComparisonRow> cmd_compare(const RunConfig& config, const std::vector<std::filesystem::path>& artifacts,
                                       const std::optional<std::filesystem::path>& manifest, std::ostream& out);

Prediction cmd_predict(const std::filesystem::path& artifact, const std::string& text, std::ostream& out);

// Parses argv, dispatches and maps exceptions to exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace spamclf::cli

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "spamclf/classical.hpp"
#include "spamclf/embedding.hpp"
#include "spamclf/neural.hpp"

namespace spamclf {

struct SyntheticOptions {
  bool enabled = false;
  std::size_t n_per_class = 200;
  double overlap = 0.2;
};

struct GnbOptions {
  double var_smoothing = 1e-9;
};

struct LstmOptions {
  LstmTrainConfig train;
  std::size_t max_len = kMaxSequenceLength;
  std::size_t min_freq = 2;
};

// Everything a run depends on. The seed fans out to the split, Word2Vec,
// the SVM shuffle and the LSTM unless a section sets its own.
struct RunConfig {
  std::string dataset;
  std::uint64_t seed = 42;
  double train_fraction = 0.8;
  std::string stopwords = "bundled";
  std::string out = "spamclf-run";
  SyntheticOptions synthetic;
  Word2VecConfig word2vec;
  std::size_t classical_min_freq = 1;
  GnbOptions gnb;
  LogRegConfig logreg;
  SvmConfig svm;
  LstmOptions lstm;

  // Copies `seed` into every per-model seed.
  void propagate_seed();
};

nlohmann::json to_json(const RunConfig& config);

// Keys missing from the document keep their defaults; unknown keys are
// rejected with std::invalid_argument.
RunConfig run_config_from_json(const nlohmann::json& doc, RunConfig base = {});
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace spamclf

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "spamclf/preprocess.hpp"

namespace spamclf {

using TokenId = std::int32_t;

// Token -> id map built from training documents. Ids 0 and 1 are reserved
// for padding and unknown tokens; kept tokens get 2..size()-1 in
// descending frequency order, ties broken lexicographically.
class Vocabulary {
 public:
  static constexpr TokenId kPadId = 0;
  static constexpr TokenId kUnkId = 1;
  static constexpr std::string_view kPadToken = "<pad>";
  static constexpr std::string_view kUnkToken = "<unk>";

  Vocabulary();

  // Rebuilds a vocabulary from (token, count) pairs already in id order
  // (starting at id 2). Throws std::invalid_argument on duplicates.
  static Vocabulary from_entries(const std::vector<std::pair<std::string, std::size_t>>& entries,
                                 std::size_t min_freq);

  std::optional<TokenId> find(const std::string& token) const;
  // Unknown tokens map to kUnkId.
  TokenId encode(const std::string& token) const;

  // Includes the two reserved ids.
  std::size_t size() const { return tokens_.size(); }
  std::size_t min_freq() const { return min_freq_; }
  const std::string& token(TokenId id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::size_t count(TokenId id) const { return counts_.at(static_cast<std::size_t>(id)); }

  // (token, count) for ids 2.., the input accepted by from_entries.
  std::vector<std::pair<std::string, std::size_t>> entries() const;

  bool operator==(const Vocabulary& other) const {
    return tokens_ == other.tokens_ && counts_ == other.counts_ && min_freq_ == other.min_freq_;
  }

 private:
  void append(std::string token, std::size_t count);

  std::vector<std::string> tokens_;
  std::vector<std::size_t> counts_;
  std::unordered_map<std::string, TokenId> ids_;
  std::size_t min_freq_ = 1;
};

// The reserved token strings are skipped. Throws DataError when docs is empty.
Vocabulary build_vocabulary(const std::vector<TokenSequence>& train_docs, std::size_t min_freq);

// Dense rows x dim table, row-major.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::size_t rows, std::size_t dim) : rows_(rows), dim_(dim), values_(rows * dim, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t dim() const { return dim_; }
  std::span<double> row(std::size_t r) { return {values_.data() + r * dim_, dim_}; }
  std::span<const double> row(std::size_t r) const { return {values_.data() + r * dim_, dim_}; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  bool operator==(const EmbeddingMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> values_;
};

struct Word2VecConfig {
  std::size_t dim = 100;
  std::size_t window = 5;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double initial_lr = 0.025;
  std::uint64_t seed = 42;

  // Throws std::invalid_argument.
  void validate() const;
};

struct Word2VecResult {
  EmbeddingMatrix vectors;
  // Mean skip-gram negative-sampling loss per (center, context) pair.
  std::vector<double> epoch_losses;
};

// Skip-gram with negative sampling over the in-vocabulary tokens of each
// document. Rows for the reserved ids stay zero. Throws DataError when no
// document has two in-vocabulary tokens.
Word2VecResult train_word2vec(const std::vector<TokenSequence>& train_docs, const Vocabulary& vocab,
                              const Word2VecConfig& config);

using DocumentVector = std::vector<double>;

// Mean of the rows of in-vocabulary tokens; the zero vector when there are none.
DocumentVector embed_document(const TokenSequence& tokens, const Vocabulary& vocab,
                              const EmbeddingMatrix& embeddings);

inline constexpr std::size_t kMaxSequenceLength = 50;

using IndexSequence = std::vector<TokenId>;

// Head of the sequence, unknown tokens as kUnkId, right-padded with kPadId
// to exactly max_len ids.
IndexSequence encode_sequence(const TokenSequence& tokens, const Vocabulary& vocab,
                              std::size_t max_len = kMaxSequenceLength);

// Text format: "w2v <rows> <dim>" then one line per row, token followed by
// dim values printed with 17 significant digits.
void save_embeddings(std::ostream& out, const Vocabulary& vocab, const EmbeddingMatrix& embeddings);
std::pair<std::vector<std::string>, EmbeddingMatrix> load_embeddings(std::istream& in);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

}  // namespace spamclf

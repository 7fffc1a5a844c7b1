#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spamclf/preprocess.hpp"

namespace spamclf {

// Spam is the positive class everywhere (label value 1).
enum class Label : std::uint8_t { ham = 0, spam = 1 };

inline constexpr std::array<Label, 2> kLabels = {Label::ham, Label::spam};

std::string_view to_string(Label label);

// Case-insensitive, surrounding whitespace ignored. Anything other than
// "ham"/"spam" yields nullopt.
std::optional<Label> parse_label(std::string_view text);

inline int to_int(Label label) { return static_cast<int>(label); }

struct EmailRecord {
  std::string message;
  Label label = Label::ham;
  // Row position in the source file (0-based, header excluded).
  std::size_t source_index = 0;

  bool operator==(const EmailRecord&) const = default;
};

class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<EmailRecord> records);

  const std::vector<EmailRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  std::size_t count(Label label) const { return class_counts_[to_int(label)]; }

  void add(EmailRecord record);

 private:
  std::vector<EmailRecord> records_;
  std::array<std::size_t, 2> class_counts_{};
};

// RFC 4180 CSV with a header containing `message` and `label` columns
// (matched case-insensitively; extra columns ignored). Throws DataError.
Corpus load_csv(const std::filesystem::path& path);
Corpus parse_csv(std::string_view text);

// Writes the two-column `message,label` form read by load_csv.
void save_csv(const Corpus& corpus, const std::filesystem::path& path);
std::string to_csv(const Corpus& corpus);

struct FilterResult {
  Corpus corpus;
  std::size_t dropped = 0;
};

// Drops records whose preprocessed token sequence is empty.
FilterResult filter_clean(const Corpus& corpus, const StopwordList& stopwords);

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 42;
};

struct Split {
  Corpus train;
  Corpus test;
};

// Per class: shuffle with the seed, put round_half_up(fraction * n_c)
// records in train and the rest in test. Records keep corpus order within
// each subset. Throws std::invalid_argument on a bad fraction and
// DataError when a class has fewer than two records.
Split stratified_split(const Corpus& corpus, const SplitSpec& spec);

// Audit listing of the source indices in each subset.
std::string split_manifest(const Split& split, const SplitSpec& spec);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};
SplitIndices parse_split_manifest(std::string_view text);

// Default Indonesian word lists for synthetic corpora.
const std::vector<std::string>& default_spam_lexicon();
const std::vector<std::string>& default_ham_lexicon();
const std::vector<std::string>& default_shared_pool();

struct SyntheticSpec {
  std::uint64_t seed = 42;
  std::size_t n_per_class = 200;
  std::vector<std::string> spam_lexicon = default_spam_lexicon();
  std::vector<std::string> ham_lexicon = default_ham_lexicon();
  std::vector<std::string> shared_pool = default_shared_pool();
  double overlap = 0.2;
  std::size_t min_words = 30;
  std::size_t max_words = 70;
  // Adds URLs, addresses, subject prefixes, digits and stopwords so the
  // messages exercise every cleaning rule.
  bool decorate = true;
};

// Each message takes round((1 - overlap) * words) tokens from its class
// lexicon and the rest from the shared pool. Record order is a seeded
// shuffle of both classes. Throws std::invalid_argument for an empty word
// list or an overlap outside [0, 1].
Corpus generate_synthetic(const SyntheticSpec& spec);

}  // namespace spamclf

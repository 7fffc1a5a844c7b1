#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace spamclf {

using TokenSequence = std::vector<std::string>;

// Applies the five cleaning rules in order: case folding, URL removal,
// email-attribute removal, filtering to [a-z ], whitespace collapse.
// The result is lowercase [a-z]+ tokens joined by single spaces and is a
// fixed point of this function.
std::string clean_text(std::string_view raw);

// Splits a cleaned string on spaces. Empty input gives an empty sequence.
TokenSequence tokenize(std::string_view clean);

class StopwordList {
 public:
  StopwordList() = default;

  // Throws std::invalid_argument for an entry that is not lowercase or
  // contains whitespace.
  StopwordList(std::vector<std::string> words, std::string source);

  // The Indonesian list compiled into the library.
  static StopwordList bundled();

  // One word per line, '#' starts a comment line. Throws DataError.
  static StopwordList load(const std::filesystem::path& path);

  // "bundled" or a file path.
  static StopwordList from_source(std::string_view source);

  bool contains(std::string_view word) const;
  std::size_t size() const { return words_.size(); }
  const std::string& source() const { return source_; }

  // Entries in sorted order.
  std::vector<std::string> words() const;

 private:
  std::unordered_set<std::string> words_;
  std::string source_;
};

TokenSequence remove_stopwords(const TokenSequence& tokens, const StopwordList& stopwords);

// remove_stopwords(tokenize(clean_text(raw)))
TokenSequence preprocess_pipeline(std::string_view raw, const StopwordList& stopwords);

// Raw text of the bundled stopword file.
std::string_view bundled_stopword_text();

}  // namespace spamclf

#include "spamclf/preprocess.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "spamclf/errors.hpp"

namespace spamclf {
namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_lower_alpha(char c) { return c >= 'a' && c <= 'z'; }

// Position where a URL starts inside a whitespace-free run, or npos.
// "www." only counts at the start of the run or after a non-letter.
std::size_t url_start(std::string_view run) {
  std::size_t best = std::string_view::npos;
  for (std::string_view scheme : {"http://", "https://"}) {
    best = std::min(best, run.find(scheme));
  }
  for (std::size_t pos = run.find("www."); pos != std::string_view::npos;
       pos = run.find("www.", pos + 1)) {
    if (pos == 0 || !is_lower_alpha(run[pos - 1])) {
      best = std::min(best, pos);
      break;
    }
  }
  return best;
}

std::string_view strip_subject_prefixes(std::string_view run) {
  static constexpr std::array<std::string_view, 3> kPrefixes = {"re:", "fw:", "fwd:"};
  bool stripped = true;
  while (stripped) {
    stripped = false;
    for (auto prefix : kPrefixes) {
      if (run.starts_with(prefix)) {
        run.remove_prefix(prefix.size());
        stripped = true;
      }
    }
  }
  return run;
}

// ".com", ".id", ".info" as a standalone token.
bool is_domain_extension(std::string_view run) {
  if (run.size() < 3 || run.size() > 5 || run.front() != '.') return false;
  return std::all_of(run.begin() + 1, run.end(), is_lower_alpha);
}

}  // namespace

std::string clean_text(std::string_view raw) {
  std::string folded(raw);
  for (char& c : folded) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }

  std::string out;
  out.reserve(folded.size());
  std::size_t i = 0;
  while (i < folded.size()) {
    while (i < folded.size() && is_space(folded[i])) ++i;
    const std::size_t begin = i;
    while (i < folded.size() && !is_space(folded[i])) ++i;
    std::string_view run(folded.data() + begin, i - begin);
    if (run.empty()) continue;

    run = run.substr(0, url_start(run));
    if (run.find('@') != std::string_view::npos) continue;
    run = strip_subject_prefixes(run);
    if (is_domain_extension(run)) continue;

    bool wrote = false;
    for (char c : run) {
      if (!is_lower_alpha(c)) continue;
      if (!wrote && !out.empty()) out.push_back(' ');
      out.push_back(c);
      wrote = true;
    }
  }
  return out;
}

TokenSequence tokenize(std::string_view clean) {
  TokenSequence tokens;
  std::size_t pos = 0;
  while (pos < clean.size()) {
    std::size_t next = clean.find(' ', pos);
    if (next == std::string_view::npos) next = clean.size();
    if (next > pos) tokens.emplace_back(clean.substr(pos, next - pos));
    pos = next + 1;
  }
  return tokens;
}

StopwordList::StopwordList(std::vector<std::string> words, std::string source)
    : source_(std::move(source)) {
  for (auto& w : words) {
    if (w.empty()) continue;
    for (char c : w) {
      if (is_space(c) || (c >= 'A' && c <= 'Z')) {
        throw std::invalid_argument("stopword entry is not a lowercase word: '" + w + "'");
      }
    }
    words_.insert(std::move(w));
  }
}

namespace {

std::vector<std::string> parse_stopword_lines(std::istream& in) {
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    auto last = line.find_last_not_of(" \t\r");
    words.push_back(line.substr(first, last - first + 1));
  }
  return words;
}

}  // namespace

StopwordList StopwordList::bundled() {
  std::istringstream in{std::string(bundled_stopword_text())};
  return StopwordList(parse_stopword_lines(in), "bundled");
}

StopwordList StopwordList::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open stopword file: " + path.string());
  try {
    return StopwordList(parse_stopword_lines(in), path.string());
  } catch (const std::invalid_argument& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

StopwordList StopwordList::from_source(std::string_view source) {
  if (source.empty() || source == "bundled") return bundled();
  return load(std::filesystem::path(source));
}

bool StopwordList::contains(std::string_view word) const {
  return words_.find(std::string(word)) != words_.end();
}

std::vector<std::string> StopwordList::words() const {
  std::vector<std::string> out(words_.begin(), words_.end());
  std::sort(out.begin(), out.end());
  return out;
}

TokenSequence remove_stopwords(const TokenSequence& tokens, const StopwordList& stopwords) {
  TokenSequence kept;
  kept.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (!stopwords.contains(t)) kept.push_back(t);
  }
  return kept;
}

TokenSequence preprocess_pipeline(std::string_view raw, const StopwordList& stopwords) {
  return remove_stopwords(tokenize(clean_text(raw)), stopwords);
}

}  // namespace spamclf

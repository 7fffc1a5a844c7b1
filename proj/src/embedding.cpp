#include "spamclf/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "spamclf/errors.hpp"
#include "spamclf/rng.hpp"

namespace spamclf {

Vocabulary::Vocabulary() {
  append(std::string(kPadToken), 0);
  append(std::string(kUnkToken), 0);
}

void Vocabulary::append(std::string token, std::size_t count) {
  const auto id = static_cast<TokenId>(tokens_.size());
  if (!ids_.emplace(token, id).second) throw std::invalid_argument("duplicate vocabulary token: " + token);
  tokens_.push_back(std::move(token));
  counts_.push_back(count);
}

Vocabulary Vocabulary::from_entries(const std::vector<std::pair<std::string, std::size_t>>& entries,
                                    std::size_t min_freq) {
  Vocabulary vocab;
  vocab.min_freq_ = min_freq;
  for (const auto& [token, count] : entries) vocab.append(token, count);
  return vocab;
}

std::optional<TokenId> Vocabulary::find(const std::string& token) const {
  auto it = ids_.find(token);
  if (it == ids_.end() || it->second < 2) return std::nullopt;
  return it->second;
}

TokenId Vocabulary::encode(const std::string& token) const { return find(token).value_or(kUnkId); }

std::vector<std::pair<std::string, std::size_t>> Vocabulary::entries() const {
  std::vector<std::pair<std::string, std::size_t>> out;
  for (std::size_t i = 2; i < tokens_.size(); ++i) out.emplace_back(tokens_[i], counts_[i]);
  return out;
}

Vocabulary build_vocabulary(const std::vector<TokenSequence>& train_docs, std::size_t min_freq) {
  if (train_docs.empty()) throw DataError("cannot build a vocabulary from an empty training set");
  std::map<std::string, std::size_t> counts;
  for (const auto& doc : train_docs) {
    for (const auto& t : doc) ++counts[t];
  }
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [token, count] : counts) {
    if (token == Vocabulary::kPadToken || token == Vocabulary::kUnkToken) continue;
    if (count >= min_freq) kept.emplace_back(token, count);
  }
  // std::map iteration is already lexicographic, so a stable sort on count
  // keeps the tie order.
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  return Vocabulary::from_entries(kept, min_freq);
}

void Word2VecConfig::validate() const {
  if (dim < 1 || window < 1 || negatives < 1) {
    throw std::invalid_argument("word2vec dim, window and negatives must be >= 1");
  }
  if (!(initial_lr > 0.0)) throw std::invalid_argument("word2vec initial_lr must be > 0");
}

namespace {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log_sigmoid(double x) {
  return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

// Cumulative unigram^0.75 distribution over ids (reserved ids get zero mass).
std::vector<double> negative_sampling_cdf(const Vocabulary& vocab) {
  std::vector<double> cdf(vocab.size(), 0.0);
  double total = 0.0;
  for (std::size_t id = 2; id < vocab.size(); ++id) {
    total += std::pow(static_cast<double>(vocab.count(static_cast<TokenId>(id))), 0.75);
    cdf[id] = total;
  }
  for (auto& c : cdf) c /= total;
  return cdf;
}

TokenId draw_negative(Rng& rng, const std::vector<double>& cdf) {
  const double u = rng.uniform();
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  if (it == cdf.end()) --it;
  return static_cast<TokenId>(it - cdf.begin());
}

}  // namespace

Word2VecResult train_word2vec(const std::vector<TokenSequence>& train_docs, const Vocabulary& vocab,
                              const Word2VecConfig& config) {
  config.validate();
  const std::size_t dim = config.dim;

  std::vector<std::vector<TokenId>> docs;
  std::size_t total_words = 0;
  bool has_pair = false;
  for (const auto& doc : train_docs) {
    std::vector<TokenId> ids;
    for (const auto& t : doc) {
      if (auto id = vocab.find(t)) ids.push_back(*id);
    }
    has_pair = has_pair || ids.size() >= 2;
    total_words += ids.size();
    docs.push_back(std::move(ids));
  }
  if (!has_pair) throw DataError("word2vec: no document has two in-vocabulary tokens");

  Rng rng(config.seed);
  Word2VecResult result{EmbeddingMatrix(vocab.size(), dim), {}};
  auto& input = result.vectors;
  for (std::size_t r = 2; r < input.rows(); ++r) {
    for (double& v : input.row(r)) v = rng.uniform(-0.5 / static_cast<double>(dim), 0.5 / static_cast<double>(dim));
  }
  EmbeddingMatrix output(vocab.size(), dim);
  const auto cdf = negative_sampling_cdf(vocab);

  const double schedule_length = static_cast<double>(total_words * config.epochs);
  std::size_t words_seen = 0;
  std::vector<double> hidden_grad(dim);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    double loss_sum = 0.0;
    std::size_t pairs = 0;
    for (const auto& ids : docs) {
      for (std::size_t center = 0; center < ids.size(); ++center, ++words_seen) {
        const double lr = config.initial_lr * std::max(1e-4, 1.0 - static_cast<double>(words_seen) / schedule_length);
        auto v = input.row(static_cast<std::size_t>(ids[center]));
        const std::size_t lo = center >= config.window ? center - config.window : 0;
        const std::size_t hi = std::min(ids.size() - 1, center + config.window);
        for (std::size_t ctx = lo; ctx <= hi; ++ctx) {
          if (ctx == center) continue;
          std::fill(hidden_grad.begin(), hidden_grad.end(), 0.0);
          const TokenId positive = ids[ctx];
          for (std::size_t k = 0; k <= config.negatives; ++k) {
            TokenId target = positive;
            double label = 1.0;
            if (k > 0) {
              target = draw_negative(rng, cdf);
              if (target == positive) continue;
              label = 0.0;
            }
            auto u = output.row(static_cast<std::size_t>(target));
            double dot = 0.0;
            for (std::size_t j = 0; j < dim; ++j) dot += u[j] * v[j];
            loss_sum -= label > 0 ? log_sigmoid(dot) : log_sigmoid(-dot);
            const double g = (label - sigmoid(dot)) * lr;
            for (std::size_t j = 0; j < dim; ++j) {
              hidden_grad[j] += g * u[j];
              u[j] += g * v[j];
            }
          }
          for (std::size_t j = 0; j < dim; ++j) v[j] += hidden_grad[j];
          ++pairs;
        }
      }
    }
    result.epoch_losses.push_back(pairs > 0 ? loss_sum / static_cast<double>(pairs) : 0.0);
  }
  return result;
}

DocumentVector embed_document(const TokenSequence& tokens, const Vocabulary& vocab,
                              const EmbeddingMatrix& embeddings) {
  DocumentVector mean(embeddings.dim(), 0.0);
  std::size_t n = 0;
  for (const auto& t : tokens) {
    auto id = vocab.find(t);
    if (!id) continue;
    auto row = embeddings.row(static_cast<std::size_t>(*id));
    for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += row[j];
    ++n;
  }
  if (n > 0) {
    for (double& v : mean) v /= static_cast<double>(n);
  }
  return mean;
}

IndexSequence encode_sequence(const TokenSequence& tokens, const Vocabulary& vocab, std::size_t max_len) {
  IndexSequence ids(max_len, Vocabulary::kPadId);
  const std::size_t n = std::min(max_len, tokens.size());
  for (std::size_t i = 0; i < n; ++i) ids[i] = vocab.encode(tokens[i]);
  return ids;
}

void save_embeddings(std::ostream& out, const Vocabulary& vocab, const EmbeddingMatrix& embeddings) {
  if (vocab.size() != embeddings.rows()) throw std::invalid_argument("vocabulary and embedding rows differ");
  out << "w2v " << embeddings.rows() << ' ' << embeddings.dim() << '\n';
  out << std::setprecision(17);
  for (std::size_t r = 0; r < embeddings.rows(); ++r) {
    out << vocab.token(static_cast<TokenId>(r));
    for (double v : embeddings.row(r)) out << ' ' << v;
    out << '\n';
  }
}

std::pair<std::vector<std::string>, EmbeddingMatrix> load_embeddings(std::istream& in) {
  std::string magic;
  std::size_t rows = 0, dim = 0;
  if (!(in >> magic >> rows >> dim) || magic != "w2v") throw DataError("embedding file: bad header");
  std::vector<std::string> tokens(rows);
  EmbeddingMatrix m(rows, dim);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!(in >> tokens[r])) throw DataError("embedding file: truncated at row " + std::to_string(r));
    for (double& v : m.row(r)) {
      if (!(in >> v)) throw DataError("embedding file: bad value in row " + std::to_string(r));
    }
  }
  return {std::move(tokens), std::move(m)};
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / std::sqrt(na * nb);
}

}  // namespace spamclf

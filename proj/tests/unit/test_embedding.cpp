#include <doctest.h>

#include <cmath>
#include <numeric>
#include <map>
#include <set>
#include <sstream>

#include "spamclf/embedding.hpp"
#include "spamclf/errors.hpp"
#include "spamclf/rng.hpp"

using namespace spamclf;

namespace {

std::vector<TokenSequence> two_cluster_docs(std::size_t n_docs, std::uint64_t seed) {
  const TokenSequence a{"alpha", "bravo", "charlie", "delta", "echo", "foxtrot"};
  const TokenSequence b{"golf", "hotel", "india", "juliet", "kilo", "lima"};
  Rng rng(seed);
  std::vector<TokenSequence> docs;
  for (std::size_t d = 0; d < n_docs; ++d) {
    const auto& words = d % 2 == 0 ? a : b;
    TokenSequence doc;
    for (std::size_t k = 0; k < 20; ++k) doc.push_back(words[rng.index(words.size())]);
    docs.push_back(std::move(doc));
  }
  return docs;
}

double reference_cosine(std::span<const double> x, std::span<const double> y) {
  double dot = 0, nx = 0, ny = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dot += x[i] * y[i];
    nx += x[i] * x[i];
    ny += y[i] * y[i];
  }
  return dot / std::sqrt(nx * ny);
}

}  // namespace

TEST_CASE("build_vocabulary") {
  SUBCASE("frequency order with reserved ids") {
    const auto v = build_vocabulary({{"a", "a", "b"}}, 1);
    CHECK(v.size() == 4);
    CHECK(v.find("a") == 2);
    CHECK(v.find("b") == 3);
    CHECK(v.token(Vocabulary::kPadId) == Vocabulary::kPadToken);
    CHECK(v.token(Vocabulary::kUnkId) == Vocabulary::kUnkToken);
    CHECK(v.count(2) == 2);
  }
  SUBCASE("ties are lexicographic, cutoff applies") {
    const auto v = build_vocabulary({{"zeta", "beta", "beta", "zeta", "alpha", "alpha", "once"}}, 2);
    CHECK(v.find("alpha") == 2);
    CHECK(v.find("beta") == 3);
    CHECK(v.find("zeta") == 4);
    CHECK_FALSE(v.find("once").has_value());
    CHECK(v.encode("once") == Vocabulary::kUnkId);
    CHECK(v.size() == 5);
  }
  SUBCASE("reserved token strings are not added as words") {
    const auto v = build_vocabulary({{"<pad>", "<unk>", "x"}}, 1);
    CHECK(v.size() == 3);
    CHECK(v.find("x") == 2);
    CHECK_FALSE(v.find("<pad>").has_value());
    CHECK(v.encode("<pad>") == Vocabulary::kUnkId);
  }
  SUBCASE("bijection and determinism on random docs") {
    Rng rng(5);
    std::vector<TokenSequence> docs(30);
    for (auto& d : docs) {
      for (std::size_t k = 0, n = rng.index(15); k < n; ++k) d.push_back(std::string(1, static_cast<char>('a' + rng.index(20))));
    }
    for (std::size_t min_freq : {1, 2, 5}) {
      const auto v = build_vocabulary(docs, min_freq);
      CHECK(v == build_vocabulary(docs, min_freq));
      std::map<std::string, std::size_t> freq;
      for (const auto& d : docs) for (const auto& t : d) ++freq[t];
      std::set<TokenId> ids;
      for (const auto& [tok, n] : freq) {
        const auto id = v.find(tok);
        CHECK(id.has_value() == (n >= min_freq));
        if (id) {
          CHECK(*id >= 2);
          CHECK(v.count(*id) == n);
          ids.insert(*id);
        }
      }
      CHECK(ids.size() + 2 == v.size());
      CHECK(Vocabulary::from_entries(v.entries(), min_freq) == v);
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(build_vocabulary({}, 1), DataError);
    CHECK_THROWS_AS(Vocabulary::from_entries({{"a", 1}, {"a", 1}}, 1), std::invalid_argument);
  }
}

TEST_CASE("embed_document") {
  const auto v = build_vocabulary({{"x", "x", "x", "y", "y", "z"}}, 1);
  EmbeddingMatrix emb(v.size(), 3);
  const double rows[3][3] = {{1.0, 2.0, 3.0}, {-1.0, 0.5, 4.0}, {0.25, 0.25, -2.0}};
  for (int r = 0; r < 3; ++r) std::copy(rows[r], rows[r] + 3, emb.row(static_cast<std::size_t>(r + 2)).begin());

  CHECK(embed_document({"y"}, v, emb) == DocumentVector{-1.0, 0.5, 4.0});
  CHECK(embed_document({"nope", "also-nope"}, v, emb) == DocumentVector{0.0, 0.0, 0.0});
  CHECK(embed_document({}, v, emb) == DocumentVector{0.0, 0.0, 0.0});
  // (1 + -1)/2, (2 + 0.5)/2, (3 + 4)/2
  CHECK(embed_document({"x", "oov", "y"}, v, emb) == DocumentVector{0.0, 1.25, 3.5});
  const TokenSequence doc{"x", "z", "y", "z"};
  TokenSequence doubled = doc;
  doubled.insert(doubled.end(), doc.begin(), doc.end());
  const auto once = embed_document(doc, v, emb);
  const auto twice = embed_document(doubled, v, emb);
  for (std::size_t i = 0; i < 3; ++i) CHECK(twice[i] == doctest::Approx(once[i]).epsilon(1e-15));
}

TEST_CASE("encode_sequence") {
  const auto v = build_vocabulary({{"a", "a", "b", "c"}}, 1);
  SUBCASE("padding") {
    const auto ids = encode_sequence({"a", "b", "c"}, v);
    REQUIRE(ids.size() == 50);
    CHECK(ids[0] == *v.find("a"));
    CHECK(ids[1] == *v.find("b"));
    CHECK(ids[2] == *v.find("c"));
    CHECK(std::all_of(ids.begin() + 3, ids.end(), [](TokenId id) { return id == Vocabulary::kPadId; }));
  }
  SUBCASE("truncation keeps the head") {
    TokenSequence long_doc;
    for (int i = 0; i < 60; ++i) long_doc.push_back(i < 50 ? "a" : "b");
    const auto ids = encode_sequence(long_doc, v);
    CHECK(ids.size() == 50);
    CHECK(std::all_of(ids.begin(), ids.end(), [&](TokenId id) { return id == *v.find("a"); }));
  }
  SUBCASE("unknown token") {
    const auto ids = encode_sequence({"a", "zzz", "b"}, v);
    CHECK(ids[1] == Vocabulary::kUnkId);
  }
  SUBCASE("length property") {
    for (std::size_t n : {0, 1, 49, 50, 51, 120}) {
      const auto ids = encode_sequence(TokenSequence(n, "q"), v);
      CHECK(ids.size() == 50);
      const auto leading = static_cast<std::size_t>(
          std::find(ids.begin(), ids.end(), Vocabulary::kPadId) - ids.begin());
      CHECK(leading == std::min<std::size_t>(n, 50));
    }
  }
}

TEST_CASE("train_word2vec") {
  const auto docs = two_cluster_docs(80, 3);
  const auto vocab = build_vocabulary(docs, 1);
  Word2VecConfig cfg;
  cfg.seed = 9;

  SUBCASE("shape, reserved rows and finiteness") {
    const auto r = train_word2vec(docs, vocab, cfg);
    CHECK(r.vectors.rows() == vocab.size());
    CHECK(r.vectors.dim() == 100);
    for (std::size_t reserved : {0, 1}) {
      for (double x : r.vectors.row(reserved)) CHECK(x == 0.0);
    }
    for (double x : r.vectors.values()) REQUIRE(std::isfinite(x));
    CHECK(r.epoch_losses.size() == cfg.epochs);
  }
  SUBCASE("deterministic given the seed") {
    CHECK(train_word2vec(docs, vocab, cfg).vectors == train_word2vec(docs, vocab, cfg).vectors);
    auto other = cfg;
    other.seed = 10;
    CHECK_FALSE(train_word2vec(docs, vocab, other).vectors == train_word2vec(docs, vocab, cfg).vectors);
  }
  SUBCASE("zero epochs returns the initialization") {
    auto zero = cfg;
    zero.epochs = 0;
    const auto r = train_word2vec(docs, vocab, zero);
    CHECK(r.epoch_losses.empty());
    const double bound = 0.5 / static_cast<double>(zero.dim);
    for (std::size_t row = 2; row < r.vectors.rows(); ++row) {
      for (double x : r.vectors.row(row)) {
        CHECK(x >= -bound);
        CHECK(x < bound);
      }
    }
    CHECK(r.vectors == train_word2vec(docs, vocab, zero).vectors);
  }
  SUBCASE("clusters separate in cosine similarity") {
    const auto r = train_word2vec(docs, vocab, cfg);
    auto cluster = [](const std::string& t) { return t < "golf" ? 0 : 1; };
    double within = 0, across = 0;
    int n_within = 0, n_across = 0;
    for (std::size_t i = 2; i < vocab.size(); ++i) {
      for (std::size_t j = i + 1; j < vocab.size(); ++j) {
        const double c = reference_cosine(r.vectors.row(i), r.vectors.row(j));
        CHECK(cosine_similarity(r.vectors.row(i), r.vectors.row(j)) == doctest::Approx(c).epsilon(1e-12));
        if (cluster(vocab.token(static_cast<TokenId>(i))) == cluster(vocab.token(static_cast<TokenId>(j)))) {
          within += c;
          ++n_within;
        } else {
          across += c;
          ++n_across;
        }
      }
    }
    CHECK(within / n_within > across / n_across);
  }
  SUBCASE("loss trend over the first epochs") {
    const auto r = train_word2vec(docs, vocab, cfg);
    int increases = 0;
    for (std::size_t e = 1; e < 3; ++e) {
      if (r.epoch_losses[e] > r.epoch_losses[e - 1]) {
        ++increases;
        CHECK(r.epoch_losses[e] <= 1.05 * r.epoch_losses[e - 1]);
      }
    }
    CHECK(increases <= 1);
    CHECK(r.epoch_losses.back() < r.epoch_losses.front());
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(train_word2vec({{"solo"}, {"lone"}}, build_vocabulary({{"solo"}, {"lone"}}, 1), cfg), DataError);
    auto bad = cfg;
    bad.dim = 0;
    CHECK_THROWS_AS(train_word2vec(docs, vocab, bad), std::invalid_argument);
    bad = cfg;
    bad.initial_lr = 0.0;
    CHECK_THROWS_AS(train_word2vec(docs, vocab, bad), std::invalid_argument);
  }
}

TEST_CASE("embedding text format round trip") {
  const auto docs = two_cluster_docs(10, 1);
  const auto vocab = build_vocabulary(docs, 1);
  Word2VecConfig cfg;
  cfg.dim = 8;
  cfg.epochs = 1;
  const auto r = train_word2vec(docs, vocab, cfg);
  std::stringstream buf;
  save_embeddings(buf, vocab, r.vectors);
  std::string header;
  std::getline(buf, header);
  CHECK(header == "w2v " + std::to_string(vocab.size()) + " 8");
  buf.seekg(0);
  const auto [tokens, loaded] = load_embeddings(buf);
  CHECK(loaded == r.vectors);
  REQUIRE(tokens.size() == vocab.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) CHECK(tokens[i] == vocab.token(static_cast<TokenId>(i)));

  std::istringstream bad("vec 2 3\n");
  CHECK_THROWS_AS(load_embeddings(bad), DataError);
}

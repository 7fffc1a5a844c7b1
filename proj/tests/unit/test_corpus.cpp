#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <filesystem>
#include <set>

#include "spamclf/corpus.hpp"
#include "spamclf/errors.hpp"
#include "spamclf/preprocess.hpp"

using namespace spamclf;

namespace {

Corpus make_corpus(std::size_t n_ham, std::size_t n_spam) {
  Corpus c;
  for (std::size_t i = 0; i < n_ham + n_spam; ++i) {
    // Interleave so classes are not contiguous.
    const bool spam = (i % 2 == 1 && i / 2 < n_spam) || i / 2 >= n_ham;
    c.add({"pesan nomor " + std::to_string(i), spam ? Label::spam : Label::ham, i});
  }
  return c;
}

std::set<std::size_t> indices(const Corpus& c) {
  std::set<std::size_t> out;
  for (const auto& r : c.records()) out.insert(r.source_index);
  return out;
}

std::string exception_text(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("labels") {
  CHECK(parse_label("spam") == Label::spam);
  CHECK(parse_label("Spam") == Label::spam);
  CHECK(parse_label("  HAM\t") == Label::ham);
  CHECK_FALSE(parse_label("unknown").has_value());
  CHECK_FALSE(parse_label("").has_value());
  CHECK_FALSE(parse_label("1").has_value());
  CHECK(to_string(Label::spam) == "spam");
  CHECK(to_int(Label::spam) == 1);
  CHECK(to_int(Label::ham) == 0);
}

TEST_CASE("parse_csv") {
  SUBCASE("counts") {
    const auto c = parse_csv("message,label\na,spam\nb,spam\nc,ham\n");
    CHECK(c.size() == 3);
    CHECK(c.count(Label::spam) == 2);
    CHECK(c.count(Label::ham) == 1);
    CHECK(c.records()[2] == EmailRecord{"c", Label::ham, 2});
  }
  SUBCASE("case-insensitive labels and columns, extra columns, quoting") {
    const auto c = parse_csv(
        "\xEF\xBB\xBFid,Label, MESSAGE \r\n"
        "1,Spam,\"Halo, \"\"teman\"\"\nbaris dua\"\r\n"
        "\r\n"
        "2,ham,biasa\r\n");
    REQUIRE(c.size() == 2);
    CHECK(c.records()[0].message == "Halo, \"teman\"\nbaris dua");
    CHECK(c.records()[0].label == Label::spam);
    CHECK(c.records()[1].label == Label::ham);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(parse_csv(""), DataError);
    CHECK_THROWS_AS(parse_csv("text,label\na,spam\n"), DataError);
    CHECK_THROWS_AS(parse_csv("message,label,Label\na,spam,ham\n"), DataError);
    CHECK_THROWS_AS(parse_csv("message,label\n\"open,spam\n"), DataError);
    const auto msg = exception_text([] { parse_csv("message,label\na,spam\nb,unknown\n"); });
    CHECK(msg.find("row 2") != std::string::npos);
    CHECK(msg.find("unknown") != std::string::npos);
    CHECK(exception_text([] { parse_csv("text,label\n"); }).find("message") != std::string::npos);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(load_csv("/nonexistent/spam.csv"), DataError); }
}

TEST_CASE("csv round trip preserves records verbatim") {
  Corpus c;
  c.add({"plain", Label::ham, 0});
  c.add({"with, comma", Label::spam, 1});
  c.add({"with \"quotes\" and\r\nnewlines\n", Label::ham, 2});
  c.add({"", Label::spam, 3});
  c.add({"  spaces  ", Label::ham, 4});
  c.add({"unicode \xC3\xA9\xE2\x82\xAC", Label::spam, 5});
  CHECK(parse_csv(to_csv(c)).records() == c.records());

  const auto path = std::filesystem::temp_directory_path() / "spamclf_corpus_roundtrip.csv";
  save_csv(c, path);
  CHECK(load_csv(path).records() == c.records());
  std::filesystem::remove(path);
}

TEST_CASE("filter_clean") {
  const auto sw = StopwordList::bundled();
  Corpus c;
  c.add({"https://promo.example.com", Label::spam, 0});
  c.add({"halo dunia", Label::ham, 1});
  c.add({"yang dan", Label::ham, 2});
  c.add({"!!! 123", Label::spam, 3});
  const auto r = filter_clean(c, sw);
  CHECK(r.dropped == 3);
  REQUIRE(r.corpus.size() == 1);
  CHECK(r.corpus.records()[0] == EmailRecord{"halo dunia", Label::ham, 1});
  CHECK(r.corpus.count(Label::ham) == 1);

  const auto none = filter_clean(Corpus{}, sw);
  CHECK(none.corpus.empty());
  CHECK(none.dropped == 0);
}

TEST_CASE("stratified_split examples") {
  SUBCASE("5 + 5 at 0.8") {
    const auto s = stratified_split(make_corpus(5, 5), {0.8, 1});
    CHECK(s.train.count(Label::ham) == 4);
    CHECK(s.train.count(Label::spam) == 4);
    CHECK(s.test.size() == 2);
  }
  SUBCASE("2,585 records at 0.8") {
    for (auto [ham, spam] : {std::pair{1292, 1293}, {1258, 1327}, {1222, 1363}, {1300, 1285}, {1000, 1585}}) {
      const auto c = make_corpus(ham, spam);
      REQUIRE(c.size() == 2585);
      const auto s = stratified_split(c, {0.8, 42});
      CHECK(s.train.size() == 2068);
      CHECK(s.test.size() == 517);
    }
  }
  SUBCASE("seed determinism") {
    const auto c = make_corpus(40, 33);
    const auto a = stratified_split(c, {0.8, 7});
    const auto b = stratified_split(c, {0.8, 7});
    CHECK(a.train.records() == b.train.records());
    CHECK(a.test.records() == b.test.records());
    CHECK(split_manifest(a, {0.8, 7}) == split_manifest(b, {0.8, 7}));
    const auto other = stratified_split(c, {0.8, 8});
    CHECK(indices(other.train) != indices(a.train));
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(stratified_split(make_corpus(5, 5), {0.0, 1}), std::invalid_argument);
    CHECK_THROWS_AS(stratified_split(make_corpus(5, 5), {1.0, 1}), std::invalid_argument);
    CHECK_THROWS_AS(stratified_split(make_corpus(5, 1), {0.8, 1}), DataError);
  }
}

TEST_CASE("stratified_split properties") {
  for (std::size_t ham : {2, 3, 7, 50, 131}) {
    for (std::size_t spam : {2, 5, 64, 99}) {
      for (double frac : {0.1, 0.5, 0.8, 0.9}) {
        const auto c = make_corpus(ham, spam);
        const auto s = stratified_split(c, {frac, ham * 31 + spam});
        const auto tr = indices(s.train);
        const auto te = indices(s.test);
        CHECK(tr.size() == s.train.size());
        CHECK(te.size() == s.test.size());
        std::vector<std::size_t> both;
        std::set_intersection(tr.begin(), tr.end(), te.begin(), te.end(), std::back_inserter(both));
        CHECK(both.empty());
        CHECK(tr.size() + te.size() == c.size());

        for (Label l : kLabels) {
          const double n_c = static_cast<double>(c.count(l));
          CHECK(s.train.count(l) == static_cast<std::size_t>(std::floor(frac * n_c + 0.5 + 1e-9)));
          if (s.train.empty()) continue;
          const double train_share = static_cast<double>(s.train.count(l)) / static_cast<double>(s.train.size());
          const double corpus_share = n_c / static_cast<double>(c.size());
          CHECK(std::abs(train_share - corpus_share) <= 1.0 / static_cast<double>(s.train.size()) + 1e-12);
        }
        CHECK(std::is_sorted(s.train.records().begin(), s.train.records().end(),
                             [](const auto& a, const auto& b) { return a.source_index < b.source_index; }));
      }
    }
  }
}

TEST_CASE("split manifest round trip") {
  const auto c = make_corpus(9, 6);
  const SplitSpec spec{0.8, 3};
  const auto s = stratified_split(c, spec);
  const auto text = split_manifest(s, spec);
  const auto parsed = parse_split_manifest(text);
  CHECK(std::set<std::size_t>(parsed.train.begin(), parsed.train.end()) == indices(s.train));
  CHECK(std::set<std::size_t>(parsed.test.begin(), parsed.test.end()) == indices(s.test));
  CHECK_THROWS_AS(parse_split_manifest("3\n[train] 1\n3\n"), DataError);
  CHECK_THROWS_AS(parse_split_manifest("[train] 1\nabc\n"), DataError);
}

TEST_CASE("generate_synthetic") {
  SUBCASE("class counts and determinism") {
    SyntheticSpec spec;
    spec.n_per_class = 100;
    const auto a = generate_synthetic(spec);
    CHECK(a.count(Label::ham) == 100);
    CHECK(a.count(Label::spam) == 100);
    CHECK(generate_synthetic(spec).records() == a.records());
    spec.seed = 43;
    CHECK(generate_synthetic(spec).records() != a.records());
  }
  SUBCASE("overlap 0 keeps class vocabularies disjoint") {
    SyntheticSpec spec;
    spec.n_per_class = 50;
    spec.overlap = 0.0;
    spec.decorate = false;
    std::array<std::set<std::string>, 2> seen;
    const auto corpus = generate_synthetic(spec);
    for (const auto& r : corpus.records()) {
      for (const auto& t : tokenize(clean_text(r.message))) seen[to_int(r.label)].insert(t);
    }
    std::vector<std::string> shared;
    std::set_intersection(seen[0].begin(), seen[0].end(), seen[1].begin(), seen[1].end(),
                          std::back_inserter(shared));
    CHECK(shared.empty());
  }
  SUBCASE("overlap share comes from the shared pool") {
    SyntheticSpec spec;
    spec.n_per_class = 20;
    spec.overlap = 0.25;
    spec.decorate = false;
    const std::set<std::string> pool(spec.shared_pool.begin(), spec.shared_pool.end());
    const auto corpus = generate_synthetic(spec);
    for (const auto& r : corpus.records()) {
      const auto tokens = tokenize(r.message);
      const auto from_pool = static_cast<std::size_t>(
          std::count_if(tokens.begin(), tokens.end(), [&](const auto& t) { return pool.count(t) > 0; }));
      const auto n = tokens.size();
      CHECK(n >= spec.min_words);
      CHECK(n <= spec.max_words);
      CHECK(n - from_pool == static_cast<std::size_t>(std::llround(0.75 * static_cast<double>(n))));
    }
  }
  SUBCASE("decorated messages survive cleaning") {
    const auto c = generate_synthetic({});
    CHECK(filter_clean(c, StopwordList::bundled()).dropped == 0);
  }
  SUBCASE("errors") {
    SyntheticSpec spec;
    spec.spam_lexicon.clear();
    CHECK_THROWS_AS(generate_synthetic(spec), std::invalid_argument);
    spec = {};
    spec.overlap = 1.5;
    CHECK_THROWS_AS(generate_synthetic(spec), std::invalid_argument);
  }
}

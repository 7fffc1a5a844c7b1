#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <regex>
#include <string>

#include "spamclf/errors.hpp"
#include "spamclf/preprocess.hpp"
#include "spamclf/rng.hpp"
#include "text_gen.hpp"

using namespace spamclf;

namespace {

// Regex restatement of the cleaning rules, written independently of the
// run-scanning implementation.
std::string regex_clean(std::string text) {
  for (char& c : text) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  // Non-ASCII bytes are never letters or whitespace; mark them so the
  // character classes below behave the same under any locale.
  for (char& c : text) {
    if (static_cast<unsigned char>(c) >= 0x80) c = '\x01';
  }
  static const std::regex url(R"(https?://[^\s]*)");
  static const std::regex www(R"((^|[^a-z])www\.[^\s]*)");
  static const std::regex email(R"([^\s]*@[^\s]*)");
  static const std::regex subject(R"((^|\s)((re|fwd?):)+)");
  static const std::regex domain(R"((^|\s)\.[a-z]{2,4}(?=\s|$))");
  static const std::regex other(R"([^a-z\s])");
  static const std::regex spaces(R"(\s+)");
  text = std::regex_replace(text, url, "");
  text = std::regex_replace(text, www, "$1");
  text = std::regex_replace(text, email, "");
  text = std::regex_replace(text, subject, "$1");
  // Run twice: adjacent extensions share the separating space.
  text = std::regex_replace(text, domain, "$1");
  text = std::regex_replace(text, domain, "$1");
  text = std::regex_replace(text, other, "");
  text = std::regex_replace(text, spaces, " ");
  const auto first = text.find_first_not_of(' ');
  if (first == std::string::npos) return "";
  const auto last = text.find_last_not_of(' ');
  return text.substr(first, last - first + 1);
}

bool has_clean_shape(const std::string& s) {
  if (s.empty()) return true;
  if (s.front() == ' ' || s.back() == ' ') return false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c == ' ') {
      if (s[i + 1] == ' ') return false;
    } else if (c < 'a' || c > 'z') {
      return false;
    }
  }
  return true;
}

bool is_subsequence(const TokenSequence& sub, const TokenSequence& full) {
  std::size_t j = 0;
  for (const auto& t : full) {
    if (j < sub.size() && sub[j] == t) ++j;
  }
  return j == sub.size();
}

}  // namespace

TEST_CASE("clean_text examples") {
  CHECK(clean_text("Halo! Kunjungi https://promo.co SEKARANG!!!") == "halo kunjungi sekarang");
  CHECK(clean_text("") == "");
  CHECK(clean_text("re: Penawaran kirim ke budi@mail.com") == "penawaran kirim ke");
  CHECK(clean_text("halo dunia") == "halo dunia");
  CHECK(clean_text("https://promo.example.com/x?y=1") == "");
}

TEST_CASE("clean_text rule details") {
  SUBCASE("www without scheme") {
    CHECK(clean_text("lihat www.promo.id sekarang") == "lihat sekarang");
    CHECK(clean_text("(www.promo.id)") == "");
    CHECK(clean_text("awww.lucu") == "awwwlucu");
  }
  SUBCASE("url marker inside a run cuts the rest of the run") {
    CHECK(clean_text("klik:https://a.b/c lagi") == "klik lagi");
  }
  SUBCASE("email addresses") {
    CHECK(clean_text("hubungi admin@toko.co.id segera") == "hubungi segera");
    CHECK(clean_text("@everyone halo") == "halo");
  }
  SUBCASE("subject prefixes") {
    CHECK(clean_text("RE: FWD: Fw: rapat") == "rapat");
    CHECK(clean_text("Re:Re:rapat besok") == "rapat besok");
    CHECK(clean_text("are: here") == "are here");
  }
  SUBCASE("standalone domain extensions") {
    CHECK(clean_text("toko .com murah .co .id .info") == "toko murah");
    CHECK(clean_text("titik .c dan .abcde") == "titik c dan abcde");
  }
  SUBCASE("characters outside a-z are removed") {
    CHECK(clean_text("diskon 50% s/d") == "diskon sd");
    CHECK(clean_text("caf\xC3\xA9 na\xC3\xAFve") == "caf nave");
  }
  SUBCASE("whitespace") {
    CHECK(clean_text("  a\t\tb\r\nc  ") == "a b c");
    CHECK(clean_text(" \n\t ") == "");
  }
}

TEST_CASE("clean_text agrees with the regex restatement") {
  const std::string fixed[] = {
      "Halo! Kunjungi https://promo.co SEKARANG!!!",
      "re: Penawaran kirim ke budi@mail.com",
      "FW: RE: promo www.toko.com/a .com .id end",
      "x@y re: .net wwww.a www.b 1www.c",
  };
  for (const auto& s : fixed) CHECK(clean_text(s) == regex_clean(s));

  Rng rng(2024);
  for (int i = 0; i < 300; ++i) {
    const auto s = testing::random_message(rng, 1 + rng.index(30));
    INFO("input: " << s);
    REQUIRE(clean_text(s) == regex_clean(s));
  }
}

TEST_CASE("clean_text properties on random unicode") {
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    const auto s = testing::random_message(rng, rng.index(40));
    const auto once = clean_text(s);
    INFO("input: " << s);
    REQUIRE(has_clean_shape(once));
    REQUIRE(clean_text(once) == once);
  }
}

TEST_CASE("tokenize") {
  CHECK(tokenize("halo dunia") == TokenSequence{"halo", "dunia"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("a b a") == TokenSequence{"a", "b", "a"});

  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const auto clean = clean_text(testing::random_message(rng, rng.index(20)));
    std::string joined;
    for (const auto& t : tokenize(clean)) {
      CHECK(!t.empty());
      if (!joined.empty()) joined += ' ';
      joined += t;
    }
    CHECK(joined == clean);
  }
}

TEST_CASE("remove_stopwords") {
  const auto sw = StopwordList::bundled();
  CHECK(remove_stopwords({"penawaran", "yang", "luar", "biasa", "dan", "gratis"}, sw) ==
        TokenSequence{"penawaran", "luar", "biasa", "gratis"});
  const TokenSequence plain{"promo", "gratis", "hari"};
  CHECK(remove_stopwords(plain, sw) == plain);
  CHECK(remove_stopwords({"yang", "dan", "di"}, sw).empty());
}

TEST_CASE("stopword invariants on random input") {
  const auto sw = StopwordList::bundled();
  Rng rng(99);
  for (int i = 0; i < 1000; ++i) {
    const auto raw = testing::random_message(rng, rng.index(40));
    const auto tokens = tokenize(clean_text(raw));
    const auto kept = remove_stopwords(tokens, sw);
    REQUIRE(is_subsequence(kept, tokens));
    REQUIRE(std::none_of(kept.begin(), kept.end(), [&](const auto& t) { return sw.contains(t); }));
    REQUIRE(remove_stopwords(kept, sw) == kept);
    const auto dropped = static_cast<std::size_t>(
        std::count_if(tokens.begin(), tokens.end(), [&](const auto& t) { return sw.contains(t); }));
    REQUIRE(kept.size() + dropped == tokens.size());
    REQUIRE(preprocess_pipeline(raw, sw) == kept);
  }
}

TEST_CASE("pipeline annihilation cases") {
  const auto sw = StopwordList::bundled();
  CHECK(preprocess_pipeline("https://www.situs.com/promo", sw).empty());
  CHECK(preprocess_pipeline("Yang dan DI", sw).empty());
}

TEST_CASE("stopword list loading") {
  const auto sw = StopwordList::bundled();
  CHECK(sw.source() == "bundled");
  CHECK(sw.size() > 100);
  CHECK(sw.contains("yang"));
  CHECK(sw.contains("dan"));
  CHECK_FALSE(sw.contains("promo"));
  const auto words = sw.words();
  CHECK(std::is_sorted(words.begin(), words.end()));
  for (const auto& w : words) CHECK(has_clean_shape(w));

  const auto dir = std::filesystem::temp_directory_path() / "spamclf_stopwords_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "custom.txt";
  {
    std::ofstream out(path);
    out << "# custom\n\npromo\n  gratis \n";
  }
  const auto custom = StopwordList::from_source(path.string());
  CHECK(custom.size() == 2);
  CHECK(custom.contains("gratis"));
  CHECK(custom.source() == path.string());
  CHECK(remove_stopwords({"promo", "yang"}, custom) == TokenSequence{"yang"});

  CHECK_THROWS_AS(StopwordList::load(dir / "missing.txt"), DataError);
  CHECK_THROWS_AS(StopwordList({"Yang"}, "x"), std::invalid_argument);
  CHECK_THROWS_AS(StopwordList({"dua kata"}, "x"), std::invalid_argument);
  std::filesystem::remove_all(dir);
}

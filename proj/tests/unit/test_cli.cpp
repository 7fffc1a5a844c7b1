#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "spamclf/artifact.hpp"
#include "spamclf/cli.hpp"
#include "spamclf/corpus.hpp"

using namespace spamclf;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "spamclf");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<nlohmann::json> jsonl(const fs::path& p) {
  std::vector<nlohmann::json> lines;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) lines.push_back(nlohmann::json::parse(line));
  return lines;
}

class TempDir {
 public:
  explicit TempDir(const std::string& name) : path_(fs::temp_directory_path() / name) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  std::string str(const std::string& sub = "") const { return (path_ / sub).string(); }

 private:
  fs::path path_;
};

}  // namespace

TEST_CASE("usage errors exit with 1") {
  CHECK(invoke({}).code == cli::kExitUsage);
  CHECK(invoke({"frobnicate"}).code == cli::kExitUsage);
  CHECK(invoke({"train"}).code == cli::kExitUsage);
  CHECK(invoke({"--help"}).code == cli::kExitOk);
  const TempDir dir("spamclf_cli_usage");
  CHECK(invoke({"--out", dir.str("run"), "prepare"}).code == cli::kExitUsage);
  const auto r = invoke({"--out", dir.str("run"), "prepare", "--synthetic", "20"});
  REQUIRE(r.code == 0);
  const auto bad = invoke({"--out", dir.str("run"), "train", "--model", "forest"});
  CHECK(bad.code == cli::kExitUsage);
  CHECK(bad.err.find("forest") != std::string::npos);
  CHECK(invoke({"--out", dir.str("run"), "compare"}).code == cli::kExitUsage);
}

TEST_CASE("data errors exit with 2") {
  const TempDir dir("spamclf_cli_data");
  const auto missing = invoke({"--out", dir.str("run"), "prepare", "--data", dir.str("nope.csv")});
  CHECK(missing.code == cli::kExitData);
  CHECK(missing.err.find("nope.csv") != std::string::npos);
  CHECK(invoke({"--out", dir.str("run"), "train", "--model", "svm"}).code == cli::kExitData);

  std::ofstream(dir.path() / "bad.csv") << "message,label\nhalo,maybe\n";
  const auto bad_label = invoke({"--out", dir.str("run"), "prepare", "--data", dir.str("bad.csv")});
  CHECK(bad_label.code == cli::kExitData);
  CHECK(bad_label.err.find("row 1") != std::string::npos);

  std::ofstream(dir.path() / "empty.csv") << "message,label\nhttps://x.example,spam\n!!!,ham\n";
  CHECK(invoke({"--out", dir.str("run"), "prepare", "--data", dir.str("empty.csv")}).code == cli::kExitData);
}

TEST_CASE("numeric failures exit with 3") {
  const TempDir dir("spamclf_cli_numeric");
  REQUIRE(invoke({"--out", dir.str("run"), "prepare", "--synthetic", "20"}).code == 0);
  std::ofstream(dir.path() / "diverge.json") << R"({"logreg": {"lr": 1e300}})";
  const auto r = invoke({"--config", dir.str("diverge.json"), "--out", dir.str("run"), "train", "--model", "logreg"});
  CHECK(r.code == cli::kExitNumeric);
}

TEST_CASE("full pipeline on a synthetic corpus") {
  const TempDir dir("spamclf_cli_pipeline");
  const auto run = dir.str("run");
  const auto prep = invoke({"--out", run, "--seed", "5", "prepare", "--synthetic", "60"});
  REQUIRE(prep.code == 0);
  CHECK(prep.out.find("Training Data") != std::string::npos);
  CHECK(prep.out.find("96") != std::string::npos);
  CHECK(prep.out.find("24") != std::string::npos);
  for (const char* f : {"prepared/records.tsv", "prepared/split.txt", "prepared/vocab_classical.tsv",
                        "prepared/vocab_lstm.tsv", "prepared/config.json", "prepared/corpus.csv"}) {
    CHECK(fs::exists(dir.path() / "run" / f));
  }
  CHECK(nlohmann::json::parse(slurp(dir.path() / "run/prepared/config.json")).at("seed") == 5);

  for (const char* model : {"gnb", "logreg", "svm"}) {
    const auto r = invoke({"--out", run, "train", "--model", model});
    REQUIRE(r.code == 0);
  }
  REQUIRE(invoke({"--out", run, "train", "--model", "lstm", "--epochs", "3"}).code == 0);

  const auto log = jsonl(dir.path() / "run/logs/metrics.jsonl");
  std::size_t lstm_epochs = 0;
  for (const auto& line : log) {
    CHECK(line.contains("timestamp"));
    CHECK(line.contains("run_id"));
    if (line.value("model", "") == "lstm" && line.value("event", "") == "epoch") ++lstm_epochs;
  }
  CHECK(lstm_epochs == 3);
  CHECK(fs::exists(dir.path() / "run/logs/lstm_loss.csv"));

  const auto artifact = dir.str("run/models/svm.spamclf");
  const auto ev1 = invoke({"--out", run, "evaluate", "--artifact", artifact});
  REQUIRE(ev1.code == 0);
  const auto report1 = slurp(dir.path() / "run/reports/svm_eval.json");
  const auto ev2 = invoke({"--out", run, "evaluate", "--artifact", artifact});
  CHECK(ev2.out == ev1.out);
  CHECK(slurp(dir.path() / "run/reports/svm_eval.json") == report1);
  const auto report = nlohmann::json::parse(report1);
  CHECK(report.at("metadata").at("model_kind") == "svm");
  CHECK(report.at("metadata").at("seed") == 5);
  CHECK(report.at("accuracy").get<double>() >= 0.9);
  CHECK(fs::exists(dir.path() / "run/reports/svm_roc.csv"));

  const auto cmp = invoke({"--out", run, "compare", "--artifact", dir.str("run/models/gnb.spamclf"), "--artifact",
                           dir.str("run/models/logreg.spamclf"), "--artifact", artifact, "--artifact",
                           dir.str("run/models/lstm.spamclf")});
  REQUIRE(cmp.code == 0);
  CHECK(cmp.out.find("TT (Sec)") != std::string::npos);
  CHECK(nlohmann::json::parse(slurp(dir.path() / "run/reports/comparison.json")).size() == 4);

  const auto spam = invoke({"predict", "--artifact", artifact, "--text",
                            "GRATIS hadiah promo diskon klik sekarang bonus jackpot menang undian"});
  REQUIRE(spam.code == 0);
  CHECK(spam.out.rfind("spam\t", 0) == 0);
  const auto url = invoke({"predict", "--artifact", artifact, "--text", "https://only.example/url"});
  CHECK(url.code == 0);
  CHECK(invoke({"predict", "--artifact", artifact, "--text", "https://only.example/url"}).out == url.out);
}

TEST_CASE("runs are reproducible from config and seed") {
  const TempDir dir("spamclf_cli_repro");
  for (const char* sub : {"a", "b"}) {
    const auto out = dir.str(sub);
    REQUIRE(invoke({"--out", out, "--seed", "11", "prepare", "--synthetic", "30"}).code == 0);
    REQUIRE(invoke({"--out", out, "train", "--model", "logreg"}).code == 0);
  }
  CHECK(slurp(dir.path() / "a/prepared/split.txt") == slurp(dir.path() / "b/prepared/split.txt"));
  CHECK(slurp(dir.path() / "a/prepared/records.tsv") == slurp(dir.path() / "b/prepared/records.tsv"));
  const auto a = load_artifact(dir.path() / "a/models/logreg.spamclf");
  const auto b = load_artifact(dir.path() / "b/models/logreg.spamclf");
  CHECK(a.model == b.model);
  CHECK(a.embedding == b.embedding);
  CHECK(a.dataset_fingerprint == b.dataset_fingerprint);
}

TEST_CASE("csv datasets and foreign manifests") {
  const TempDir dir("spamclf_cli_csv");
  SyntheticSpec spec;
  spec.n_per_class = 30;
  save_csv(generate_synthetic(spec), dir.path() / "data.csv");
  const auto run = dir.str("run");
  REQUIRE(invoke({"--out", run, "prepare", "--data", dir.str("data.csv")}).code == 0);
  REQUIRE(invoke({"--out", run, "train", "--model", "gnb"}).code == 0);
  const auto artifact = dir.str("run/models/gnb.spamclf");

  // A manifest whose training half differs from the one the model saw.
  std::ofstream(dir.path() / "other.txt") << "[train] 1\n0\n[test] 1\n1\n";
  const auto r = invoke({"--out", run, "evaluate", "--artifact", artifact, "--manifest", dir.str("other.txt")});
  CHECK(r.code == cli::kExitData);
  CHECK(r.err.find("mismatch") != std::string::npos);
}

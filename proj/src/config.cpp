#include "spamclf/config.hpp"

#include <fstream>
#include <stdexcept>

#include "spamclf/errors.hpp"

namespace spamclf {

void RunConfig::propagate_seed() {
  word2vec.seed = seed;
  svm.seed = seed;
  lstm.train.seed = seed;
}

nlohmann::json to_json(const RunConfig& c) {
  const auto& t = c.lstm.train;
  return {
      {"dataset", c.dataset},
      {"seed", c.seed},
      {"train_fraction", c.train_fraction},
      {"stopwords", c.stopwords},
      {"out", c.out},
      {"synthetic",
       {{"enabled", c.synthetic.enabled}, {"n_per_class", c.synthetic.n_per_class}, {"overlap", c.synthetic.overlap}}},
      {"word2vec",
       {{"dim", c.word2vec.dim},
        {"window", c.word2vec.window},
        {"negatives", c.word2vec.negatives},
        {"epochs", c.word2vec.epochs},
        {"initial_lr", c.word2vec.initial_lr},
        {"seed", c.word2vec.seed}}},
      {"classical_min_freq", c.classical_min_freq},
      {"gnb", {{"var_smoothing", c.gnb.var_smoothing}}},
      {"logreg",
       {{"l2_lambda", c.logreg.l2_lambda},
        {"max_iter", c.logreg.max_iter},
        {"lr", c.logreg.lr},
        {"tolerance", c.logreg.tolerance}}},
      {"svm", {{"c", c.svm.c}, {"epochs", c.svm.epochs}, {"seed", c.svm.seed}}},
      {"lstm",
       {{"embed_dim", t.embed_dim},
        {"hidden_dim", t.hidden_dim},
        {"batch_size", t.batch_size},
        {"epochs", t.epochs},
        {"lr", t.adam.lr},
        {"beta1", t.adam.beta1},
        {"beta2", t.adam.beta2},
        {"eps", t.adam.eps},
        {"clip_norm", t.clip_norm},
        {"seed", t.seed},
        {"max_len", c.lstm.max_len},
        {"min_freq", c.lstm.min_freq}}},
  };
}

namespace {

template <typename T>
void read(const nlohmann::json& obj, const char* key, T& target) {
  if (auto it = obj.find(key); it != obj.end()) target = it->get<T>();
}

void reject_unknown(const nlohmann::json& obj, const nlohmann::json& reference, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!reference.contains(it.key())) throw std::invalid_argument("unknown config key: " + where + it.key());
  }
}

}  // namespace

RunConfig run_config_from_json(const nlohmann::json& doc, RunConfig c) {
  if (!doc.is_object()) throw std::invalid_argument("config must be a JSON object");
  const auto reference = to_json(c);
  reject_unknown(doc, reference, "");
  for (const char* section : {"synthetic", "word2vec", "gnb", "logreg", "svm", "lstm"}) {
    if (doc.contains(section)) reject_unknown(doc.at(section), reference.at(section), std::string(section) + ".");
  }
  try {
    read(doc, "dataset", c.dataset);
    // A top-level seed re-seeds every section; section seeds below still win.
    if (doc.contains("seed")) {
      c.seed = doc.at("seed").get<std::uint64_t>();
      c.propagate_seed();
    }
    read(doc, "train_fraction", c.train_fraction);
    read(doc, "stopwords", c.stopwords);
    read(doc, "out", c.out);
    read(doc, "classical_min_freq", c.classical_min_freq);
    const auto empty = nlohmann::json::object();
    const auto& syn = doc.value("synthetic", empty);
    read(syn, "enabled", c.synthetic.enabled);
    read(syn, "n_per_class", c.synthetic.n_per_class);
    read(syn, "overlap", c.synthetic.overlap);
    const auto& w2v = doc.value("word2vec", empty);
    read(w2v, "dim", c.word2vec.dim);
    read(w2v, "window", c.word2vec.window);
    read(w2v, "negatives", c.word2vec.negatives);
    read(w2v, "epochs", c.word2vec.epochs);
    read(w2v, "initial_lr", c.word2vec.initial_lr);
    read(w2v, "seed", c.word2vec.seed);
    read(doc.value("gnb", empty), "var_smoothing", c.gnb.var_smoothing);
    const auto& lr = doc.value("logreg", empty);
    read(lr, "l2_lambda", c.logreg.l2_lambda);
    read(lr, "max_iter", c.logreg.max_iter);
    read(lr, "lr", c.logreg.lr);
    read(lr, "tolerance", c.logreg.tolerance);
    const auto& svm = doc.value("svm", empty);
    read(svm, "c", c.svm.c);
    read(svm, "epochs", c.svm.epochs);
    read(svm, "seed", c.svm.seed);
    const auto& lstm = doc.value("lstm", empty);
    auto& t = c.lstm.train;
    read(lstm, "embed_dim", t.embed_dim);
    read(lstm, "hidden_dim", t.hidden_dim);
    read(lstm, "batch_size", t.batch_size);
    read(lstm, "epochs", t.epochs);
    read(lstm, "lr", t.adam.lr);
    read(lstm, "beta1", t.adam.beta1);
    read(lstm, "beta2", t.adam.beta2);
    read(lstm, "eps", t.adam.eps);
    read(lstm, "clip_norm", t.clip_norm);
    read(lstm, "seed", t.seed);
    read(lstm, "max_len", c.lstm.max_len);
    read(lstm, "min_freq", c.lstm.min_freq);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("bad config value: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file: " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return run_config_from_json(doc);
}

}  // namespace spamclf

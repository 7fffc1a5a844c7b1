#include "spamclf/artifact.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "spamclf/checksum.hpp"
#include "spamclf/errors.hpp"

namespace spamclf {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::gnb: return "gnb";
    case ModelKind::logreg: return "logreg";
    case ModelKind::svm: return "svm";
    case ModelKind::lstm: return "lstm";
  }
  return "unknown";
}

std::optional<ModelKind> parse_model_kind(std::string_view text) {
  for (auto kind : {ModelKind::gnb, ModelKind::logreg, ModelKind::svm, ModelKind::lstm}) {
    if (text == to_string(kind)) return kind;
  }
  return std::nullopt;
}

std::string_view display_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::gnb: return "NB";
    case ModelKind::logreg: return "LR";
    case ModelKind::svm: return "SVM";
    case ModelKind::lstm: return "LSTM";
  }
  return "?";
}

std::string_view type_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::gnb: return "Naive Bayes";
    case ModelKind::logreg: return "Logistic Regression";
    case ModelKind::svm: return "SVM - Linear Kernel";
    case ModelKind::lstm: return "LSTM";
  }
  return "?";
}

ModelKind ModelArtifact::kind() const { return static_cast<ModelKind>(model.index()); }

namespace {

constexpr std::string_view kMagic = "SPAMCLF1";

struct ArrayRef {
  std::string name;
  std::vector<std::size_t> shape;
  std::span<const double> values;
};

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_u64(std::string_view in) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(in[static_cast<std::size_t>(i)]);
  return v;
}

void put_double(std::string& out, double d) { put_u64(out, std::bit_cast<std::uint64_t>(d)); }

std::vector<ArrayRef> arrays_of(const ModelArtifact& a) {
  std::vector<ArrayRef> arrays;
  const auto emb = [&] {
    arrays.push_back({"embedding", {a.embedding.rows(), a.embedding.dim()}, a.embedding.values()});
  };
  switch (a.kind()) {
    case ModelKind::gnb: {
      const auto& m = std::get<GaussianNbModel>(a.model);
      arrays.push_back({"class_priors", {2}, m.class_priors});
      arrays.push_back({"ham_means", {m.dim()}, m.means[0]});
      arrays.push_back({"spam_means", {m.dim()}, m.means[1]});
      arrays.push_back({"ham_variances", {m.dim()}, m.variances[0]});
      arrays.push_back({"spam_variances", {m.dim()}, m.variances[1]});
      emb();
      break;
    }
    case ModelKind::logreg: {
      const auto& m = std::get<LogRegModel>(a.model);
      arrays.push_back({"weights", {m.weights.size()}, m.weights});
      arrays.push_back({"bias", {1}, std::span<const double>(&m.bias, 1)});
      emb();
      break;
    }
    case ModelKind::svm: {
      const auto& m = std::get<LinearSvmModel>(a.model);
      arrays.push_back({"weights", {m.weights.size()}, m.weights});
      arrays.push_back({"bias", {1}, std::span<const double>(&m.bias, 1)});
      arrays.push_back({"epoch_objectives", {m.epoch_objectives.size()}, m.epoch_objectives});
      emb();
      break;
    }
    case ModelKind::lstm: {
      const auto& p = std::get<LstmParams>(a.model);
      for (const auto& block : p.blocks()) {
        std::vector<std::size_t> shape = {block.rows};
        if (block.cols != 1) shape.push_back(block.cols);
        arrays.push_back({block.name, shape, p.values().subspan(block.offset, block.rows * block.cols)});
      }
      break;
    }
  }
  return arrays;
}

std::size_t model_dim(const ModelArtifact& a) {
  switch (a.kind()) {
    case ModelKind::gnb: return std::get<GaussianNbModel>(a.model).dim();
    case ModelKind::logreg: return std::get<LogRegModel>(a.model).weights.size();
    case ModelKind::svm: return std::get<LinearSvmModel>(a.model).weights.size();
    case ModelKind::lstm: return std::get<LstmParams>(a.model).shape().embed_dim;
  }
  return 0;
}

}  // namespace

std::string serialize_artifact(const ModelArtifact& a) {
  const auto arrays = arrays_of(a);

  std::string payload;
  nlohmann::json array_specs = nlohmann::json::array();
  for (const auto& arr : arrays) {
    std::size_t n = 1;
    for (auto s : arr.shape) n *= s;
    if (n != arr.values.size()) throw std::logic_error("artifact array " + arr.name + " has inconsistent shape");
    for (double v : arr.values) put_double(payload, v);
    array_specs.push_back({{"name", arr.name}, {"shape", arr.shape}, {"dtype", "f64le"}});
  }
  Fnv1a64 checksum;
  checksum.update(payload);

  nlohmann::json vocab_tokens = nlohmann::json::array();
  nlohmann::json vocab_counts = nlohmann::json::array();
  for (const auto& [token, count] : a.vocabulary.entries()) {
    vocab_tokens.push_back(token);
    vocab_counts.push_back(count);
  }

  nlohmann::json header = {
      {"format_version", ModelArtifact::kFormatVersion},
      {"model_kind", to_string(a.kind())},
      {"dim", model_dim(a)},
      {"arrays", array_specs},
      {"payload_bytes", payload.size()},
      {"payload_checksum", "fnv1a64:" + checksum.hex()},
      {"vocabulary", {{"min_freq", a.vocabulary.min_freq()}, {"tokens", vocab_tokens}, {"counts", vocab_counts}}},
      {"stopwords", {{"source", a.stopwords.source()}, {"words", a.stopwords.words()}}},
      {"max_len", a.max_len},
      {"config", a.config},
      {"dataset_fingerprint", a.dataset_fingerprint},
      {"train_seconds", a.train_seconds},
  };
  if (a.kind() == ModelKind::lstm) {
    const auto& s = std::get<LstmParams>(a.model).shape();
    header["lstm_shape"] = {{"vocab_size", s.vocab_size}, {"embed_dim", s.embed_dim}, {"hidden_dim", s.hidden_dim}};
  }
  if (a.kind() == ModelKind::logreg) {
    const auto& m = std::get<LogRegModel>(a.model);
    header["logreg"] = {{"l2_lambda", m.l2_lambda}, {"max_iter", m.max_iter}, {"iterations", m.iterations}};
  }
  if (a.kind() == ModelKind::svm) header["svm"] = {{"c", std::get<LinearSvmModel>(a.model).c}};

  const std::string header_text = header.dump();
  std::string out(kMagic);
  put_u64(out, header_text.size());
  out += header_text;
  out += payload;
  return out;
}

ModelArtifact deserialize_artifact(std::string_view bytes) {
  if (bytes.size() < 16 || bytes.substr(0, 8) != kMagic) throw DataError("artifact: bad magic");
  const std::uint64_t header_len = get_u64(bytes.substr(8, 8));
  if (header_len > bytes.size() - 16) throw DataError("artifact: truncated header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(16, header_len));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("artifact: bad header: ") + e.what());
  }
  const std::string_view payload = bytes.substr(16 + header_len);

  try {
    if (header.at("format_version").get<int>() != ModelArtifact::kFormatVersion) {
      throw DataError("artifact: unsupported format version");
    }
    if (header.at("payload_bytes").get<std::size_t>() != payload.size()) throw DataError("artifact: payload size mismatch");
    Fnv1a64 checksum;
    checksum.update(payload);
    if (header.at("payload_checksum").get<std::string>() != "fnv1a64:" + checksum.hex()) {
      throw DataError("artifact: payload checksum mismatch");
    }

    // Decode every declared array in order.
    std::map<std::string, std::pair<std::vector<std::size_t>, std::vector<double>>> arrays;
    std::size_t offset = 0;
    for (const auto& spec : header.at("arrays")) {
      auto shape = spec.at("shape").get<std::vector<std::size_t>>();
      std::size_t n = 1;
      for (auto s : shape) n *= s;
      if (offset + 8 * n > payload.size()) throw DataError("artifact: payload shorter than declared arrays");
      std::vector<double> values(n);
      for (std::size_t i = 0; i < n; ++i) {
        values[i] = std::bit_cast<double>(get_u64(payload.substr(offset + 8 * i, 8)));
      }
      offset += 8 * n;
      arrays[spec.at("name").get<std::string>()] = {std::move(shape), std::move(values)};
    }
    auto take = [&](const std::string& name) -> std::vector<double>& {
      auto it = arrays.find(name);
      if (it == arrays.end()) throw DataError("artifact: missing array '" + name + "'");
      return it->second.second;
    };

    ModelArtifact a;
    const auto& vocab = header.at("vocabulary");
    const auto tokens = vocab.at("tokens").get<std::vector<std::string>>();
    const auto counts = vocab.at("counts").get<std::vector<std::size_t>>();
    if (tokens.size() != counts.size()) throw DataError("artifact: vocabulary tokens/counts differ");
    std::vector<std::pair<std::string, std::size_t>> entries;
    for (std::size_t i = 0; i < tokens.size(); ++i) entries.emplace_back(tokens[i], counts[i]);
    a.vocabulary = Vocabulary::from_entries(entries, vocab.at("min_freq").get<std::size_t>());
    a.stopwords = StopwordList(header.at("stopwords").at("words").get<std::vector<std::string>>(),
                               header.at("stopwords").at("source").get<std::string>());
    a.max_len = header.at("max_len").get<std::size_t>();
    a.config = header.at("config");
    a.dataset_fingerprint = header.at("dataset_fingerprint").get<std::string>();
    a.train_seconds = header.at("train_seconds").get<double>();

    const auto kind = parse_model_kind(header.at("model_kind").get<std::string>());
    if (!kind) throw DataError("artifact: unknown model kind");
    const auto dim = header.at("dim").get<std::size_t>();
    auto load_embedding = [&] {
      const auto& shape = arrays.at("embedding").first;
      if (shape.size() != 2 || shape[0] != a.vocabulary.size() || shape[1] != dim) {
        throw DataError("artifact: embedding shape does not match vocabulary/dim");
      }
      a.embedding = EmbeddingMatrix(shape[0], shape[1]);
      const auto& v = take("embedding");
      std::copy(v.begin(), v.end(), a.embedding.values().begin());
    };
    auto check_len = [&](const std::vector<double>& v, std::size_t n, const char* name) {
      if (v.size() != n) throw DataError(std::string("artifact: array '") + name + "' has wrong length");
    };

    switch (*kind) {
      case ModelKind::gnb: {
        GaussianNbModel m;
        const auto& priors = take("class_priors");
        check_len(priors, 2, "class_priors");
        m.class_priors = {priors[0], priors[1]};
        m.means = {take("ham_means"), take("spam_means")};
        m.variances = {take("ham_variances"), take("spam_variances")};
        for (const auto* v : {&m.means[0], &m.means[1], &m.variances[0], &m.variances[1]}) check_len(*v, dim, "gnb");
        a.model = std::move(m);
        load_embedding();
        break;
      }
      case ModelKind::logreg: {
        LogRegModel m;
        m.weights = take("weights");
        check_len(m.weights, dim, "weights");
        check_len(take("bias"), 1, "bias");
        m.bias = take("bias")[0];
        const auto& extra = header.at("logreg");
        m.l2_lambda = extra.at("l2_lambda").get<double>();
        m.max_iter = extra.at("max_iter").get<std::size_t>();
        m.iterations = extra.at("iterations").get<std::size_t>();
        a.model = std::move(m);
        load_embedding();
        break;
      }
      case ModelKind::svm: {
        LinearSvmModel m;
        m.weights = take("weights");
        check_len(m.weights, dim, "weights");
        check_len(take("bias"), 1, "bias");
        m.bias = take("bias")[0];
        m.c = header.at("svm").at("c").get<double>();
        m.epoch_objectives = take("epoch_objectives");
        a.model = std::move(m);
        load_embedding();
        break;
      }
      case ModelKind::lstm: {
        const auto& s = header.at("lstm_shape");
        LstmShape shape{s.at("vocab_size").get<std::size_t>(), s.at("embed_dim").get<std::size_t>(),
                        s.at("hidden_dim").get<std::size_t>()};
        if (shape.vocab_size != a.vocabulary.size()) throw DataError("artifact: LSTM vocabulary size mismatch");
        LstmParams p(shape);
        for (const auto& block : p.blocks()) {
          const auto& v = take(block.name);
          check_len(v, block.rows * block.cols, block.name);
          std::copy(v.begin(), v.end(), p.values().begin() + static_cast<std::ptrdiff_t>(block.offset));
        }
        a.model = std::move(p);
        break;
      }
    }
    return a;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("artifact: malformed header: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("artifact: ") + e.what());
  }
}

void save_artifact(const ModelArtifact& artifact, const std::filesystem::path& path) {
  const auto bytes = serialize_artifact(artifact);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write artifact: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing artifact: " + path.string());
}

ModelArtifact load_artifact(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open artifact: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return deserialize_artifact(buf.str());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::vector<Prediction> predict_documents(const ModelArtifact& a, const std::vector<TokenSequence>& docs) {
  std::vector<Prediction> out;
  out.reserve(docs.size());
  if (a.kind() == ModelKind::lstm) {
    std::vector<IndexSequence> encoded;
    encoded.reserve(docs.size());
    for (const auto& d : docs) encoded.push_back(encode_sequence(d, a.vocabulary, a.max_len));
    return predict_lstm(std::get<LstmParams>(a.model), encoded);
  }
  for (const auto& d : docs) {
    const auto x = embed_document(d, a.vocabulary, a.embedding);
    switch (a.kind()) {
      case ModelKind::gnb: out.push_back(predict_gnb(std::get<GaussianNbModel>(a.model), x)); break;
      case ModelKind::logreg: out.push_back(predict_logreg(std::get<LogRegModel>(a.model), x)); break;
      case ModelKind::svm: out.push_back(predict_svm(std::get<LinearSvmModel>(a.model), x)); break;
      case ModelKind::lstm: break;
    }
  }
  return out;
}

Prediction predict_text(const ModelArtifact& artifact, std::string_view raw) {
  return predict_documents(artifact, {preprocess_pipeline(raw, artifact.stopwords)}).front();
}

}  // namespace spamclf

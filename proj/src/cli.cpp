#include "spamclf/cli.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "spamclf/checksum.hpp"
#include "spamclf/corpus.hpp"
#include "spamclf/errors.hpp"

namespace spamclf::cli {

namespace fs = std::filesystem;

RunPaths::RunPaths(const fs::path& root_dir)
    : root(root_dir),
      prepared(root_dir / "prepared"),
      records(prepared / "records.tsv"),
      manifest(prepared / "split.txt"),
      vocab_classical(prepared / "vocab_classical.tsv"),
      vocab_lstm(prepared / "vocab_lstm.tsv"),
      config(prepared / "config.json"),
      models(root_dir / "models"),
      logs(root_dir / "logs"),
      metrics_log(logs / "metrics.jsonl"),
      reports(root_dir / "reports") {}

fs::path RunPaths::artifact(ModelKind kind) const { return models / (std::string(to_string(kind)) + ".spamclf"); }

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

std::string join(const TokenSequence& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

std::string with_commas(std::size_t n) {
  std::string digits = std::to_string(n);
  std::string out;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i > 0 && (digits.size() - i) % 3 == 0) out.push_back(',');
    out.push_back(digits[i]);
  }
  return out;
}

std::string vocab_tsv(const Vocabulary& vocab) {
  std::ostringstream out;
  out << "# token\tid\tcount (min_freq=" << vocab.min_freq() << ")\n";
  for (std::size_t id = 0; id < vocab.size(); ++id) {
    const auto tid = static_cast<TokenId>(id);
    out << vocab.token(tid) << '\t' << id << '\t' << vocab.count(tid) << '\n';
  }
  return out.str();
}

std::vector<TokenSequence> docs_of(const std::vector<PreparedRecord>& records) {
  std::vector<TokenSequence> docs;
  docs.reserve(records.size());
  for (const auto& r : records) docs.push_back(r.tokens);
  return docs;
}

std::vector<Label> labels_of(const std::vector<PreparedRecord>& records) {
  std::vector<Label> labels;
  labels.reserve(records.size());
  for (const auto& r : records) labels.push_back(r.label);
  return labels;
}

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t secs = std::chrono::system_clock::to_time_t(now);
  const auto millis =
      std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  std::ostringstream out;
  out << buf << '.' << std::setw(3) << std::setfill('0') << millis << 'Z';
  return out.str();
}

std::string make_run_id(const RunConfig& config, std::string_view what) {
  Fnv1a64 h;
  h.update(to_json(config).dump());
  return std::string(what) + "-s" + std::to_string(config.seed) + "-" + h.hex().substr(0, 8);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

std::string dataset_fingerprint(const std::vector<PreparedRecord>& records) {
  Fnv1a64 h;
  for (const auto& r : records) {
    h.update(std::to_string(r.source_index));
    h.update("\t");
    h.update(to_string(r.label));
    h.update("\t");
    h.update(join(r.tokens));
    h.update("\n");
  }
  return "fnv1a64:" + h.hex();
}

PreparedData load_prepared(const RunPaths& paths, const std::optional<fs::path>& manifest) {
  if (!fs::exists(paths.records)) {
    throw DataError("no prepared dataset in " + paths.root.string() + " (run `prepare` first)");
  }
  std::map<std::size_t, PreparedRecord> by_index;
  std::istringstream in(read_file(paths.records));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto tab1 = line.find('\t');
    const auto tab2 = tab1 == std::string::npos ? tab1 : line.find('\t', tab1 + 1);
    if (tab2 == std::string::npos) throw DataError(paths.records.string() + ": malformed line " + std::to_string(line_no));
    PreparedRecord r;
    r.source_index = std::stoull(line.substr(0, tab1));
    const auto label = parse_label(line.substr(tab1 + 1, tab2 - tab1 - 1));
    if (!label) throw DataError(paths.records.string() + ": bad label on line " + std::to_string(line_no));
    r.label = *label;
    r.tokens = tokenize(std::string_view(line).substr(tab2 + 1));
    by_index[r.source_index] = std::move(r);
  }

  const auto split = parse_split_manifest(read_file(manifest.value_or(paths.manifest)));
  PreparedData data;
  auto collect = [&](const std::vector<std::size_t>& indices, std::vector<PreparedRecord>& into) {
    for (auto idx : indices) {
      auto it = by_index.find(idx);
      if (it == by_index.end()) throw DataError("split manifest references unknown record " + std::to_string(idx));
      into.push_back(it->second);
    }
  };
  collect(split.train, data.train);
  collect(split.test, data.test);
  return data;
}

MetricsLog::MetricsLog(fs::path path, std::string run_id) : path_(std::move(path)), run_id_(std::move(run_id)) {
  fs::create_directories(path_.parent_path());
}

void MetricsLog::write(const std::string& event, nlohmann::json fields, std::optional<std::size_t> epoch) {
  nlohmann::json line = {{"timestamp", iso_timestamp()}, {"run_id", run_id_}, {"event", event}};
  if (epoch) line["epoch"] = *epoch;
  for (auto it = fields.begin(); it != fields.end(); ++it) line[it.key()] = it.value();
  std::ofstream out(path_, std::ios::app);
  if (!out) throw DataError("cannot append to " + path_.string());
  out << line.dump() << '\n';
  ++lines_;
}

PrepareSummary cmd_prepare(const RunConfig& config, std::ostream& out) {
  const RunPaths paths(config.out);
  fs::create_directories(paths.prepared);

  Corpus corpus;
  if (config.synthetic.enabled) {
    SyntheticSpec spec;
    spec.seed = config.seed;
    spec.n_per_class = config.synthetic.n_per_class;
    spec.overlap = config.synthetic.overlap;
    corpus = generate_synthetic(spec);
    save_csv(corpus, paths.prepared / "corpus.csv");
  } else {
    if (config.dataset.empty()) throw UsageError("prepare needs --data <csv> or --synthetic <n>");
    corpus = load_csv(config.dataset);
  }
  const auto stopwords = StopwordList::from_source(config.stopwords);
  const auto filtered = filter_clean(corpus, stopwords);
  if (filtered.corpus.empty()) throw DataError("no records left after cleaning");
  const SplitSpec spec{config.train_fraction, config.seed};
  const auto split = stratified_split(filtered.corpus, spec);

  std::ostringstream records;
  records << "# source_index\tlabel\ttokens\n";
  std::vector<TokenSequence> train_docs;
  for (const auto& r : filtered.corpus.records()) {
    records << r.source_index << '\t' << to_string(r.label) << '\t' << join(preprocess_pipeline(r.message, stopwords))
            << '\n';
  }
  for (const auto& r : split.train.records()) train_docs.push_back(preprocess_pipeline(r.message, stopwords));
  write_file(paths.records, records.str());
  write_file(paths.manifest, split_manifest(split, spec));

  const auto vocab_classical = build_vocabulary(train_docs, config.classical_min_freq);
  const auto vocab_lstm = build_vocabulary(train_docs, config.lstm.min_freq);
  write_file(paths.vocab_classical, vocab_tsv(vocab_classical));
  write_file(paths.vocab_lstm, vocab_tsv(vocab_lstm));
  write_file(paths.config, to_json(config).dump(2) + "\n");

  PrepareSummary s{corpus.size(), filtered.dropped, filtered.corpus.size(), split.train.size(), split.test.size(),
                   vocab_classical.size(), vocab_lstm.size()};
  auto pct = [&](std::size_t n) {
    std::ostringstream p;
    p << std::fixed << std::setprecision(0) << 100.0 * static_cast<double>(n) / static_cast<double>(s.clean) << '%';
    return p.str();
  };
  out << "Loaded " << with_commas(s.raw) << " records (spam " << corpus.count(Label::spam) << ", ham "
      << corpus.count(Label::ham) << "); dropped " << s.dropped << " empty after cleaning.\n\n";
  out << std::left << std::setw(20) << "Subset" << std::right << std::setw(18) << "Number of Samples" << std::setw(12)
      << "Percentage" << '\n';
  out << std::left << std::setw(20) << "Training Data" << std::right << std::setw(18) << with_commas(s.train)
      << std::setw(12) << pct(s.train) << '\n';
  out << std::left << std::setw(20) << "Test Data" << std::right << std::setw(18) << with_commas(s.test)
      << std::setw(12) << pct(s.test) << '\n';
  out << std::left << std::setw(20) << "Total Clean Data" << std::right << std::setw(18) << with_commas(s.clean)
      << std::setw(12) << "100%" << "\n\n";
  out << "Vocabulary: " << s.vocab_classical << " ids (Word2Vec, min_freq " << config.classical_min_freq << "), "
      << s.vocab_lstm << " ids (LSTM, min_freq " << config.lstm.min_freq << ")\n";
  out << "Wrote " << paths.prepared.string() << "\n";
  return s;
}

ModelArtifact train_model(const RunConfig& config, ModelKind kind, const std::vector<PreparedRecord>& train,
                          MetricsLog* log) {
  ModelArtifact artifact;
  artifact.stopwords = StopwordList::from_source(config.stopwords);
  artifact.config = to_json(config);
  artifact.dataset_fingerprint = dataset_fingerprint(train);
  const auto docs = docs_of(train);
  const auto labels = labels_of(train);

  if (kind == ModelKind::lstm) {
    artifact.vocabulary = build_vocabulary(docs, config.lstm.min_freq);
    artifact.max_len = config.lstm.max_len;
    std::vector<IndexSequence> xs;
    std::vector<int> ys;
    for (std::size_t i = 0; i < docs.size(); ++i) {
      xs.push_back(encode_sequence(docs[i], artifact.vocabulary, artifact.max_len));
      ys.push_back(to_int(labels[i]));
    }
    const auto start = std::chrono::steady_clock::now();
    auto result = train_lstm(xs, ys, artifact.vocabulary.size(), config.lstm.train, [&](const EpochRecord& e) {
      if (log) log->write("epoch", {{"model", "lstm"}, {"loss", e.mean_loss}, {"seconds", e.seconds}}, e.epoch);
    });
    artifact.train_seconds = seconds_since(start);
    artifact.model = std::move(result.params);
    return artifact;
  }

  artifact.vocabulary = build_vocabulary(docs, config.classical_min_freq);
  auto w2v = train_word2vec(docs, artifact.vocabulary, config.word2vec);
  if (log) {
    for (std::size_t e = 0; e < w2v.epoch_losses.size(); ++e) {
      log->write("epoch", {{"model", "word2vec"}, {"loss", w2v.epoch_losses[e]}}, e + 1);
    }
  }
  artifact.embedding = std::move(w2v.vectors);
  std::vector<DocumentVector> xs;
  xs.reserve(docs.size());
  for (const auto& d : docs) xs.push_back(embed_document(d, artifact.vocabulary, artifact.embedding));

  const auto start = std::chrono::steady_clock::now();
  switch (kind) {
    case ModelKind::gnb: artifact.model = train_gnb(xs, labels, config.gnb.var_smoothing); break;
    case ModelKind::logreg: artifact.model = train_logreg(xs, labels, config.logreg); break;
    case ModelKind::svm: artifact.model = train_linear_svm(xs, labels, config.svm); break;
    case ModelKind::lstm: break;
  }
  artifact.train_seconds = seconds_since(start);
  return artifact;
}

TrainSummary cmd_train(const RunConfig& config, ModelKind kind, std::ostream& out) {
  const RunPaths paths(config.out);
  const auto data = load_prepared(paths);
  MetricsLog log(paths.metrics_log, make_run_id(config, to_string(kind)));
  log.write("train_start", {{"model", to_string(kind)}, {"train_records", data.train.size()}, {"config", to_json(config)}});

  const auto artifact = train_model(config, kind, data.train, &log);

  std::vector<Label> truths = labels_of(data.train);
  std::vector<Label> preds;
  for (const auto& p : predict_documents(artifact, docs_of(data.train))) preds.push_back(p.label);
  const double train_accuracy = basic_metrics(confusion(preds, truths)).accuracy;
  log.write("train_complete",
            {{"model", to_string(kind)}, {"train_seconds", artifact.train_seconds}, {"train_accuracy", train_accuracy}});

  fs::create_directories(paths.models);
  const auto path = paths.artifact(kind);
  save_artifact(artifact, path);

  if (kind == ModelKind::lstm) {
    // Loss curve for plotting, rebuilt from the log records written above.
    std::ostringstream csv;
    csv << "epoch,mean_loss,seconds\n" << std::setprecision(17);
    std::istringstream lines(read_file(paths.metrics_log));
    std::string line;
    while (std::getline(lines, line)) {
      const auto j = nlohmann::json::parse(line);
      if (j.value("run_id", "") == log.run_id() && j.value("event", "") == "epoch" && j.value("model", "") == "lstm") {
        csv << j.at("epoch").get<std::size_t>() << ',' << j.at("loss").get<double>() << ','
            << j.at("seconds").get<double>() << '\n';
      }
    }
    write_file(paths.logs / "lstm_loss.csv", csv.str());
  }

  out << "Trained " << type_name(kind) << " on " << data.train.size() << " records in " << std::fixed
      << std::setprecision(3) << artifact.train_seconds << " s (train accuracy " << std::setprecision(4)
      << train_accuracy << ")\n";
  out << "Artifact: " << path.string() << "\n";
  return {path, artifact.train_seconds, log.lines_written()};
}

namespace {

struct Evaluation {
  ModelArtifact artifact;
  MetricsReport report;
  std::vector<ScoredPrediction> scored;
};

Evaluation evaluate_artifact(const RunConfig& config, const fs::path& artifact_path,
                             const std::optional<fs::path>& manifest) {
  const RunPaths paths(config.out);
  Evaluation ev{load_artifact(artifact_path), {}, {}};
  const auto data = load_prepared(paths, manifest);
  if (data.test.empty()) throw DataError("test split is empty");
  if (dataset_fingerprint(data.train) != ev.artifact.dataset_fingerprint) {
    throw DataError("artifact " + artifact_path.string() +
                    " was trained on different data than the prepared split (vocabulary/artifact mismatch)");
  }
  const auto preds = predict_documents(ev.artifact, docs_of(data.test));
  const auto truths = labels_of(data.test);
  ev.report = evaluate_predictions(preds, truths, ev.artifact.train_seconds);
  for (std::size_t i = 0; i < preds.size(); ++i) ev.scored.push_back({preds[i].score, to_int(truths[i])});
  return ev;
}

}  // namespace

MetricsReport cmd_evaluate(const RunConfig& config, const fs::path& artifact_path,
                           const std::optional<fs::path>& manifest, std::ostream& out) {
  const RunPaths paths(config.out);
  const auto ev = evaluate_artifact(config, artifact_path, manifest);
  const auto kind = ev.artifact.kind();
  const std::string stem = std::string(to_string(kind)) + "_eval";

  nlohmann::json doc = to_json(ev.report);
  doc["metadata"] = {{"model_kind", to_string(kind)},
                     {"artifact", artifact_path.string()},
                     {"seed", ev.artifact.config.value("seed", config.seed)},
                     {"dataset_hash", ev.artifact.dataset_fingerprint},
                     {"config", ev.artifact.config}};
  write_file(paths.reports / (stem + ".json"), doc.dump(2) + "\n");

  std::ostringstream text;
  text << type_name(kind) << " on " << ev.report.confusion.total() << " test records\n\n"
       << format_confusion(ev.report.confusion) << '\n'
       << format_class_report(ev.report) << '\n'
       << std::fixed << std::setprecision(4) << "AUC " << (ev.report.auc ? *ev.report.auc : 0.0) << "  Kappa "
       << ev.report.kappa << "  MCC " << ev.report.mcc << '\n';
  write_file(paths.reports / (stem + ".txt"), text.str());

  std::ostringstream roc;
  roc << "threshold,fpr,tpr\n" << std::setprecision(17);
  for (const auto& p : roc_curve(ev.scored)) roc << p.threshold << ',' << p.fpr << ',' << p.tpr << '\n';
  write_file(paths.reports / (std::string(to_string(kind)) + "_roc.csv"), roc.str());

  out << text.str();
  return ev.report;
}

std::vector<ComparisonRow> cmd_compare(const RunConfig& config, const std::vector<fs::path>& artifacts,
                                       const std::optional<fs::path>& manifest, std::ostream& out) {
  if (artifacts.empty()) throw UsageError("compare needs at least one --artifact");
  std::vector<ComparisonRow> rows;
  for (const auto& path : artifacts) {
    auto ev = evaluate_artifact(config, path, manifest);
    rows.push_back({std::string(display_name(ev.artifact.kind())), std::string(type_name(ev.artifact.kind())),
                    std::move(ev.report)});
  }
  rows = compare_models(std::move(rows));

  const RunPaths paths(config.out);
  const auto table = format_comparison_table(rows);
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& r : rows) {
    auto j = to_json(r.report);
    j["model"] = r.name;
    j["type"] = r.type;
    doc.push_back(std::move(j));
  }
  write_file(paths.reports / "comparison.txt", table);
  write_file(paths.reports / "comparison.json", doc.dump(2) + "\n");
  out << table;
  return rows;
}

Prediction cmd_predict(const fs::path& artifact_path, const std::string& text, std::ostream& out) {
  const auto artifact = load_artifact(artifact_path);
  const auto p = predict_text(artifact, text);
  out << to_string(p.label) << '\t' << std::setprecision(17) << p.score << '\n';
  return p;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spam/ham email classification: preprocessing, Word2Vec, NB/LR/SVM and LSTM"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Seed for the split and every model");
  app.add_option("--out", out_dir, "Run directory");

  auto* prepare = app.add_subcommand("prepare", "Clean, split and index a dataset");
  std::optional<std::string> data, stopwords;
  std::optional<double> fraction, overlap;
  std::optional<std::size_t> synthetic;
  prepare->add_option("--data", data, "CSV with message,label columns");
  prepare->add_option("--synthetic", synthetic, "Generate a synthetic corpus with N messages per class");
  prepare->add_option("--overlap", overlap, "Shared-vocabulary fraction of synthetic messages");
  prepare->add_option("--stopwords", stopwords, "Stopword file (default: bundled list)");
  prepare->add_option("--train-fraction", fraction, "Training share of each class");

  auto* train = app.add_subcommand("train", "Train one model on the prepared training split");
  std::string model_name;
  std::optional<std::size_t> epochs;
  train->add_option("--model", model_name, "gnb | logreg | svm | lstm")->required();
  train->add_option("--epochs", epochs, "Override the LSTM epoch count");

  auto* evaluate = app.add_subcommand("evaluate", "Score an artifact on the test split");
  std::string artifact_path;
  std::optional<std::string> manifest;
  evaluate->add_option("--artifact", artifact_path, "Model artifact")->required();
  evaluate->add_option("--manifest", manifest, "Split manifest (default: the prepared one)");

  auto* compare = app.add_subcommand("compare", "Comparison table over several artifacts");
  std::vector<std::string> artifact_paths;
  compare->add_option("--artifact", artifact_paths, "Model artifacts (repeatable)");
  compare->add_option("--manifest", manifest, "Split manifest (default: the prepared one)");

  auto* predict = app.add_subcommand("predict", "Classify one raw message");
  std::string text;
  predict->add_option("--artifact", artifact_path, "Model artifact")->required();
  predict->add_option("--text", text, "Raw message text")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    RunConfig config;
    if (!config_path.empty()) {
      config = load_run_config(config_path);
    } else if (!*prepare) {
      // Later stages inherit the configuration resolved by `prepare`.
      const RunPaths saved(out_dir.value_or(config.out));
      if (fs::exists(saved.config)) config = load_run_config(saved.config);
    }
    if (seed) {
      config.seed = *seed;
      config.propagate_seed();
    }
    if (out_dir) config.out = *out_dir;
    if (data) config.dataset = *data;
    if (stopwords) config.stopwords = *stopwords;
    if (fraction) config.train_fraction = *fraction;
    if (synthetic) {
      config.synthetic.enabled = true;
      config.synthetic.n_per_class = *synthetic;
    }
    if (overlap) config.synthetic.overlap = *overlap;
    if (epochs) config.lstm.train.epochs = *epochs;

    if (*prepare) {
      cmd_prepare(config, out);
    } else if (*train) {
      const auto kind = parse_model_kind(model_name);
      if (!kind) throw UsageError("unknown model kind '" + model_name + "' (expected gnb, logreg, svm or lstm)");
      cmd_train(config, *kind, out);
    } else if (*evaluate) {
      cmd_evaluate(config, artifact_path, manifest ? std::optional<fs::path>(*manifest) : std::nullopt, out);
    } else if (*compare) {
      std::vector<fs::path> paths(artifact_paths.begin(), artifact_paths.end());
      cmd_compare(config, paths, manifest ? std::optional<fs::path>(*manifest) : std::nullopt, out);
    } else if (*predict) {
      cmd_predict(artifact_path, text, out);
    }
    return kExitOk;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace spamclf::cli

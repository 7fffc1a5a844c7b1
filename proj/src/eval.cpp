#include "spamclf/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace spamclf {
namespace {

Ratio ratio(double num, double den) {
  if (den == 0.0) return {0.0, true};
  return {num / den, false};
}

Ratio harmonic(const Ratio& p, const Ratio& r) {
  if (p.degenerate || r.degenerate || p.value + r.value == 0.0) return {0.0, true};
  return {2.0 * p.value * r.value / (p.value + r.value), false};
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string pad(std::string s, std::size_t width, bool left = false) {
  if (s.size() >= width) return s;
  return left ? s + std::string(width - s.size(), ' ') : std::string(width - s.size(), ' ') + s;
}

}  // namespace

ConfusionMatrix confusion(std::span<const Label> preds, std::span<const Label> truths) {
  if (preds.size() != truths.size()) throw std::invalid_argument("confusion: length mismatch");
  if (preds.empty()) throw std::invalid_argument("confusion: empty input");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const bool p = preds[i] == Label::spam;
    const bool t = truths[i] == Label::spam;
    if (p && t) ++cm.tp;
    else if (p && !t) ++cm.fp;
    else if (!p && t) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

BasicMetrics basic_metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw std::invalid_argument("basic_metrics: empty confusion matrix");
  BasicMetrics m;
  m.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
  m.precision = ratio(static_cast<double>(cm.tp), static_cast<double>(cm.tp + cm.fp));
  m.recall = ratio(static_cast<double>(cm.tp), static_cast<double>(cm.tp + cm.fn));
  m.f1 = harmonic(m.precision, m.recall);
  return m;
}

MetricsReport per_class_report(std::span<const Label> preds, std::span<const Label> truths) {
  MetricsReport report;
  report.confusion = confusion(preds, truths);
  const auto& cm = report.confusion;
  // Ham as positive swaps tp<->tn and fp<->fn.
  const ConfusionMatrix ham_view{cm.tn, cm.fn, cm.fp, cm.tp};
  const auto spam = basic_metrics(cm);
  const auto ham = basic_metrics(ham_view);
  report.accuracy = spam.accuracy;
  report.per_class[to_int(Label::spam)] = {spam.precision, spam.recall, spam.f1, cm.tp + cm.fn};
  report.per_class[to_int(Label::ham)] = {ham.precision, ham.recall, ham.f1, cm.tn + cm.fp};

  const double total = static_cast<double>(cm.total());
  for (const auto& c : report.per_class) {
    const double w = static_cast<double>(c.support) / total;
    report.macro.precision += c.precision.value / 2.0;
    report.macro.recall += c.recall.value / 2.0;
    report.macro.f1 += c.f1.value / 2.0;
    report.weighted.precision += w * c.precision.value;
    report.weighted.recall += w * c.recall.value;
    report.weighted.f1 += w * c.f1.value;
  }
  report.kappa = cohen_kappa(cm);
  report.mcc = mcc(cm);
  return report;
}

double roc_auc(std::span<const ScoredPrediction> scored) {
  std::vector<std::size_t> order(scored.size());
  std::size_t positives = 0;
  for (std::size_t i = 0; i < scored.size(); ++i) {
    if (!std::isfinite(scored[i].score)) throw std::invalid_argument("roc_auc: non-finite score");
    order[i] = i;
    positives += scored[i].truth == 1 ? 1 : 0;
  }
  const std::size_t negatives = scored.size() - positives;
  if (positives == 0 || negatives == 0) throw std::invalid_argument("roc_auc: need both classes");

  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scored[a].score < scored[b].score; });
  // Sum of 1-based average ranks of the positives (Mann-Whitney U).
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scored[order[j]].score == scored[order[i]].score) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (scored[order[k]].truth == 1) rank_sum += avg_rank;
    }
    i = j;
  }
  const double p = static_cast<double>(positives);
  const double u = rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(negatives));
}

std::vector<RocPoint> roc_curve(std::span<const ScoredPrediction> scored) {
  std::vector<ScoredPrediction> sorted(scored.begin(), scored.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.score > b.score; });
  double positives = 0, negatives = 0;
  for (const auto& s : sorted) (s.truth == 1 ? positives : negatives) += 1;
  std::vector<RocPoint> points{{sorted.empty() ? 0.0 : std::numeric_limits<double>::infinity(), 0.0, 0.0}};
  double tp = 0, fp = 0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    for (; j < sorted.size() && sorted[j].score == sorted[i].score; ++j) (sorted[j].truth == 1 ? tp : fp) += 1;
    points.push_back({sorted[i].score, negatives > 0 ? fp / negatives : 0.0, positives > 0 ? tp / positives : 0.0});
    i = j;
  }
  return points;
}

double cohen_kappa(const ConfusionMatrix& cm) {
  const double n = static_cast<double>(cm.total());
  if (n == 0) throw std::invalid_argument("cohen_kappa: empty confusion matrix");
  const double observed = static_cast<double>(cm.tp + cm.tn) / n;
  const double spam_truth = static_cast<double>(cm.tp + cm.fn) / n;
  const double spam_pred = static_cast<double>(cm.tp + cm.fp) / n;
  const double chance = spam_truth * spam_pred + (1.0 - spam_truth) * (1.0 - spam_pred);
  if (chance == 1.0) return 0.0;
  return (observed - chance) / (1.0 - chance);
}

double mcc(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw std::invalid_argument("mcc: empty confusion matrix");
  const double tp = static_cast<double>(cm.tp), tn = static_cast<double>(cm.tn);
  const double fp = static_cast<double>(cm.fp), fn = static_cast<double>(cm.fn);
  const double den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  if (den == 0.0) return 0.0;
  return (tp * tn - fp * fn) / std::sqrt(den);
}

MetricsReport evaluate_predictions(std::span<const Prediction> preds, std::span<const Label> truths,
                                   double train_seconds) {
  std::vector<Label> labels;
  std::vector<ScoredPrediction> scored;
  bool has_pos = false, has_neg = false;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    labels.push_back(preds[i].label);
    if (i < truths.size()) {
      scored.push_back({preds[i].score, to_int(truths[i])});
      (truths[i] == Label::spam ? has_pos : has_neg) = true;
    }
  }
  auto report = per_class_report(labels, truths);
  if (has_pos && has_neg) report.auc = roc_auc(scored);
  report.train_seconds = train_seconds;
  return report;
}

std::vector<ComparisonRow> compare_models(std::vector<ComparisonRow> rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const ComparisonRow& a, const ComparisonRow& b) {
    if (a.report.accuracy != b.report.accuracy) return a.report.accuracy > b.report.accuracy;
    return a.name < b.name;
  });
  return rows;
}

std::string format_comparison_table(const std::vector<ComparisonRow>& rows) {
  std::size_t name_w = 5, type_w = 4;
  for (const auto& r : rows) {
    name_w = std::max(name_w, r.name.size());
    type_w = std::max(type_w, r.type.size());
  }
  std::ostringstream out;
  const std::vector<std::string> cols = {"Accuracy", "AUC", "Recall", "Precision", "F1", "Kappa", "MCC", "TT (Sec)"};
  const std::vector<std::string> macro_cols = {"Recall(m)", "Prec.(m)", "F1(m)"};
  out << pad("Model", name_w, true) << "  " << pad("Type", type_w, true);
  for (const auto& c : cols) out << "  " << pad(c, 9);
  out << "  |";
  for (const auto& c : macro_cols) out << "  " << pad(c, 9);
  out << '\n';
  for (const auto& r : rows) {
    const auto& m = r.report;
    out << pad(r.name, name_w, true) << "  " << pad(r.type, type_w, true);
    const std::vector<std::string> cells = {
        fixed(m.accuracy, 4),        m.auc ? fixed(*m.auc, 4) : "n/a", fixed(m.weighted.recall, 4),
        fixed(m.weighted.precision, 4), fixed(m.weighted.f1, 4),      fixed(m.kappa, 4),
        fixed(m.mcc, 4),             fixed(m.train_seconds, 3)};
    for (const auto& c : cells) out << "  " << pad(c, 9);
    out << "  |";
    for (double v : {m.macro.recall, m.macro.precision, m.macro.f1}) out << "  " << pad(fixed(v, 4), 9);
    out << '\n';
  }
  out << "Recall/Precision/F1 are support-weighted averages; (m) columns are macro averages.\n";
  return out.str();
}

std::string format_class_report(const MetricsReport& report) {
  std::ostringstream out;
  out << pad("", 12, true) << pad("Precision", 10) << pad("Recall", 10) << pad("F1-score", 10) << pad("Support", 10)
      << '\n';
  const std::size_t total = report.confusion.total();
  for (Label label : kLabels) {
    const auto& c = report.of(label);
    std::string name(to_string(label));
    name[0] = static_cast<char>(name[0] - 'a' + 'A');
    out << pad(name, 12, true) << pad(fixed(c.precision.value, 2), 10) << pad(fixed(c.recall.value, 2), 10)
        << pad(fixed(c.f1.value, 2), 10) << pad(std::to_string(c.support), 10) << '\n';
  }
  out << pad("Accuracy", 12, true) << pad("", 20) << pad(fixed(report.accuracy, 2), 10)
      << pad(std::to_string(total), 10) << '\n';
  out << pad("Macro Avg", 12, true) << pad(fixed(report.macro.precision, 2), 10)
      << pad(fixed(report.macro.recall, 2), 10) << pad(fixed(report.macro.f1, 2), 10)
      << pad(std::to_string(total), 10) << '\n';
  out << pad("Weighted Avg", 12, true) << pad(fixed(report.weighted.precision, 2), 10)
      << pad(fixed(report.weighted.recall, 2), 10) << pad(fixed(report.weighted.f1, 2), 10)
      << pad(std::to_string(total), 10) << '\n';
  return out.str();
}

std::string format_confusion(const ConfusionMatrix& cm) {
  std::ostringstream out;
  out << "              pred Ham  pred Spam\n";
  out << "true Ham   " << pad(std::to_string(cm.tn), 11) << pad(std::to_string(cm.fp), 11) << '\n';
  out << "true Spam  " << pad(std::to_string(cm.fn), 11) << pad(std::to_string(cm.tp), 11) << '\n';
  return out.str();
}

nlohmann::json to_json(const ConfusionMatrix& cm) {
  return {{"tp", cm.tp}, {"fp", cm.fp}, {"fn", cm.fn}, {"tn", cm.tn}, {"total", cm.total()}};
}

namespace {

nlohmann::json ratio_json(const Ratio& r) {
  nlohmann::json j = r.value;
  return r.degenerate ? nlohmann::json{{"value", r.value}, {"degenerate", true}} : j;
}

}  // namespace

nlohmann::json to_json(const MetricsReport& report) {
  nlohmann::json per_class = nlohmann::json::object();
  for (Label label : kLabels) {
    const auto& c = report.of(label);
    per_class[std::string(to_string(label))] = {{"precision", ratio_json(c.precision)},
                                                {"recall", ratio_json(c.recall)},
                                                {"f1", ratio_json(c.f1)},
                                                {"support", c.support}};
  }
  const auto spam = basic_metrics(report.confusion);
  nlohmann::json j = {
      {"confusion_matrix", to_json(report.confusion)},
      {"accuracy", report.accuracy},
      {"precision", ratio_json(spam.precision)},
      {"recall", ratio_json(spam.recall)},
      {"f1", ratio_json(spam.f1)},
      {"per_class", per_class},
      {"macro_avg", {{"precision", report.macro.precision}, {"recall", report.macro.recall}, {"f1", report.macro.f1}}},
      {"weighted_avg",
       {{"precision", report.weighted.precision}, {"recall", report.weighted.recall}, {"f1", report.weighted.f1}}},
      {"kappa", report.kappa},
      {"mcc", report.mcc},
      {"train_seconds", report.train_seconds},
  };
  j["auc"] = report.auc ? nlohmann::json(*report.auc) : nlohmann::json(nullptr);
  return j;
}

}  // namespace spamclf

#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "spamclf/corpus.hpp"
#include "spamclf/prediction.hpp"

namespace spamclf {

// Spam is the positive class.
struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

// Throws std::invalid_argument on a length mismatch or empty input.
ConfusionMatrix confusion(std::span<const Label> preds, std::span<const Label> truths);

// A ratio whose denominator may be zero; then value is 0 and degenerate is set.
struct Ratio {
  double value = 0.0;
  bool degenerate = false;
};

struct BasicMetrics {
  double accuracy = 0.0;
  Ratio precision;
  Ratio recall;
  Ratio f1;
};

// Accuracy, precision, recall and F1 for the spam class.
BasicMetrics basic_metrics(const ConfusionMatrix& cm);

struct ClassMetrics {
  Ratio precision;
  Ratio recall;
  Ratio f1;
  std::size_t support = 0;
};

struct AveragedMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MetricsReport {
  ConfusionMatrix confusion;
  double accuracy = 0.0;
  std::array<ClassMetrics, 2> per_class;  // indexed by Label
  AveragedMetrics macro;
  AveragedMetrics weighted;
  double kappa = 0.0;
  double mcc = 0.0;
  std::optional<double> auc;
  double train_seconds = 0.0;

  const ClassMetrics& of(Label label) const { return per_class[to_int(label)]; }
};

// Treats each class in turn as positive; macro is the plain mean of the
// two classes and weighted uses their supports. No AUC.
MetricsReport per_class_report(std::span<const Label> preds, std::span<const Label> truths);

struct ScoredPrediction {
  double score = 0.0;
  int truth = 0;
};

// Probability that a random positive outscores a random negative, ties
// counting one half, via average ranks. Throws std::invalid_argument when
// either class is missing or a score is not finite.
double roc_auc(std::span<const ScoredPrediction> scored);

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

// Curve vertices from (0,0) to (1,1), one per distinct score.
std::vector<RocPoint> roc_curve(std::span<const ScoredPrediction> scored);

double cohen_kappa(const ConfusionMatrix& cm);
double mcc(const ConfusionMatrix& cm);

// Full report for one model: per-class metrics plus AUC over the scores.
MetricsReport evaluate_predictions(std::span<const Prediction> preds, std::span<const Label> truths,
                                   double train_seconds = 0.0);

struct ComparisonRow {
  std::string name;
  std::string type;
  MetricsReport report;
};

// Accuracy descending; ties by name.
std::vector<ComparisonRow> compare_models(std::vector<ComparisonRow> rows);

// Accuracy, AUC, Recall, Precision, F1 (weighted), Kappa, MCC, TT (Sec)
// at 4 decimals, followed by the macro-averaged recall/precision/F1.
std::string format_comparison_table(const std::vector<ComparisonRow>& rows);

// Per-class precision/recall/F1/support at 2 decimals with accuracy,
// macro and weighted rows.
std::string format_class_report(const MetricsReport& report);

std::string format_confusion(const ConfusionMatrix& cm);

nlohmann::json to_json(const MetricsReport& report);
nlohmann::json to_json(const ConfusionMatrix& cm);

}  // namespace spamclf

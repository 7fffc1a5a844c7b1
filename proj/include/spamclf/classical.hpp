#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "spamclf/corpus.hpp"
#include "spamclf/embedding.hpp"
#include "spamclf/prediction.hpp"

namespace spamclf {

// Classical models over mean-pooled document vectors. Every trainer throws
// DataError if only one class is present or the vectors differ in length;
// predictors throw std::invalid_argument on a dimension mismatch.

// ---------------------------------------------------------------------------
// Gaussian naive Bayes

struct GaussianNbModel {
  std::array<double, 2> class_priors{};      // indexed by Label
  std::array<std::vector<double>, 2> means;  // per class, per feature
  std::array<std::vector<double>, 2> variances;

  std::size_t dim() const { return means[0].size(); }
  bool operator==(const GaussianNbModel&) const = default;
};

// Per-class maximum-likelihood mean and variance; every variance is then
// increased by var_smoothing times the largest per-feature variance of
// the whole training set.
GaussianNbModel train_gnb(const std::vector<DocumentVector>& xs, const std::vector<Label>& ys,
                          double var_smoothing = 1e-9);

// log prior + sum of per-feature Gaussian log densities, for each class.
std::array<double, 2> gnb_joint_log_likelihood(const GaussianNbModel& model, std::span<const double> x);

// score = joint log likelihood of spam minus that of ham.
Prediction predict_gnb(const GaussianNbModel& model, std::span<const double> x);

// ---------------------------------------------------------------------------
// Logistic regression

struct LogRegConfig {
  double l2_lambda = 1e-4;
  std::size_t max_iter = 1000;
  double lr = 0.1;
  double tolerance = 1e-8;
};

struct LogRegModel {
  std::vector<double> weights;
  double bias = 0.0;
  double l2_lambda = 1e-4;
  std::size_t max_iter = 1000;
  std::size_t iterations = 0;

  bool operator==(const LogRegModel&) const = default;
};

// Mean binary cross-entropy + (lambda/2)|w|^2. The bias is not penalized.
double logreg_objective(std::span<const double> weights, double bias, const std::vector<DocumentVector>& xs,
                        const std::vector<Label>& ys, double l2_lambda);

// Gradient of logreg_objective; grad_w must have the weight dimension.
void logreg_gradient(std::span<const double> weights, double bias, const std::vector<DocumentVector>& xs,
                     const std::vector<Label>& ys, double l2_lambda, std::span<double> grad_w, double& grad_b);

// Full-batch gradient descent from zero. Stops after max_iter steps or when
// the objective improves by less than tolerance. Throws NumericError if the
// objective becomes non-finite.
LogRegModel train_logreg(const std::vector<DocumentVector>& xs, const std::vector<Label>& ys,
                         const LogRegConfig& config = {});

// score = sigmoid(w.x + b)
Prediction predict_logreg(const LogRegModel& model, std::span<const double> x);

// ---------------------------------------------------------------------------
// Linear SVM

struct SvmConfig {
  double c = 1.0;
  std::size_t epochs = 100;
  std::uint64_t seed = 42;
};

struct LinearSvmModel {
  std::vector<double> weights;
  double bias = 0.0;
  double c = 1.0;
  // Primal objective of the averaged iterate after each epoch.
  std::vector<double> epoch_objectives;

  bool operator==(const LinearSvmModel&) const = default;
};

// (1/2)|w|^2 + c * sum of hinge losses, bias unpenalized.
double svm_objective(std::span<const double> weights, double bias, const std::vector<DocumentVector>& xs,
                     const std::vector<Label>& ys, double c);

// Pegasos: lambda = 1/(c n), step 1/(lambda t), one pass per epoch over a
// seeded shuffle. The bias is an unregularized augmented coordinate. The
// returned parameters are the average of all iterates.
LinearSvmModel train_linear_svm(const std::vector<DocumentVector>& xs, const std::vector<Label>& ys,
                                const SvmConfig& config = {});

// score = w.x + b
Prediction predict_svm(const LinearSvmModel& model, std::span<const double> x);

}  // namespace spamclf

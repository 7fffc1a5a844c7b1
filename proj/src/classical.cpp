#include "spamclf/classical.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include "spamclf/errors.hpp"
#include "spamclf/rng.hpp"

namespace spamclf {
namespace {

std::size_t check_training_set(const std::vector<DocumentVector>& xs, const std::vector<Label>& ys) {
  if (xs.size() != ys.size()) throw DataError("feature and label counts differ");
  if (xs.empty()) throw DataError("empty training set");
  const std::size_t dim = xs.front().size();
  for (const auto& x : xs) {
    if (x.size() != dim) throw DataError("document vectors differ in dimension");
  }
  const bool has_spam = std::find(ys.begin(), ys.end(), Label::spam) != ys.end();
  const bool has_ham = std::find(ys.begin(), ys.end(), Label::ham) != ys.end();
  if (!has_spam || !has_ham) throw DataError("training set contains a single class");
  return dim;
}

void check_dim(std::size_t expected, std::size_t got) {
  if (expected != got) {
    throw std::invalid_argument("dimension mismatch: model expects " + std::to_string(expected) + ", got " +
                                std::to_string(got));
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// -log(sigmoid(z)), stable for large |z|.
double softplus_neg(double z) { return z >= 0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z)); }

double sign_of(Label y) { return y == Label::spam ? 1.0 : -1.0; }

}  // namespace

GaussianNbModel train_gnb(const std::vector<DocumentVector>& xs, const std::vector<Label>& ys, double var_smoothing) {
  const std::size_t dim = check_training_set(xs, ys);
  GaussianNbModel model;
  std::array<std::size_t, 2> counts{};
  for (Label c : kLabels) {
    model.means[to_int(c)].assign(dim, 0.0);
    model.variances[to_int(c)].assign(dim, 0.0);
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const int c = to_int(ys[i]);
    ++counts[c];
    for (std::size_t j = 0; j < dim; ++j) model.means[c][j] += xs[i][j];
  }
  for (Label label : kLabels) {
    const int c = to_int(label);
    for (double& m : model.means[c]) m /= static_cast<double>(counts[c]);
    model.class_priors[c] = static_cast<double>(counts[c]) / static_cast<double>(xs.size());
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const int c = to_int(ys[i]);
    for (std::size_t j = 0; j < dim; ++j) {
      const double d = xs[i][j] - model.means[c][j];
      model.variances[c][j] += d * d;
    }
  }
  for (Label label : kLabels) {
    const int c = to_int(label);
    for (double& v : model.variances[c]) v /= static_cast<double>(counts[c]);
  }

  double max_feature_var = 0.0;
  for (std::size_t j = 0; j < dim; ++j) {
    double mean = 0.0;
    for (const auto& x : xs) mean += x[j];
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (const auto& x : xs) var += (x[j] - mean) * (x[j] - mean);
    max_feature_var = std::max(max_feature_var, var / static_cast<double>(xs.size()));
  }
  double epsilon = var_smoothing * max_feature_var;
  // All-constant features would otherwise leave zero variances.
  if (!(epsilon > 0.0)) epsilon = var_smoothing > 0.0 ? var_smoothing : 1e-9;
  for (auto& vars : model.variances) {
    for (double& v : vars) v += epsilon;
  }
  return model;
}

std::array<double, 2> gnb_joint_log_likelihood(const GaussianNbModel& model, std::span<const double> x) {
  check_dim(model.dim(), x.size());
  std::array<double, 2> out{};
  for (Label label : kLabels) {
    const int c = to_int(label);
    double ll = std::log(model.class_priors[c]);
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double var = model.variances[c][j];
      const double d = x[j] - model.means[c][j];
      ll -= 0.5 * std::log(2.0 * std::numbers::pi * var) + d * d / (2.0 * var);
    }
    out[c] = ll;
  }
  return out;
}

Prediction predict_gnb(const GaussianNbModel& model, std::span<const double> x) {
  const auto ll = gnb_joint_log_likelihood(model, x);
  const double margin = ll[to_int(Label::spam)] - ll[to_int(Label::ham)];
  return {label_at_threshold(margin, 0.0), margin};
}

double logreg_objective(std::span<const double> weights, double bias, const std::vector<DocumentVector>& xs,
                        const std::vector<Label>& ys, double l2_lambda) {
  double loss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double z = dot(weights, xs[i]) + bias;
    loss += ys[i] == Label::spam ? softplus_neg(z) : softplus_neg(-z);
  }
  loss /= static_cast<double>(xs.size());
  return loss + 0.5 * l2_lambda * dot(weights, weights);
}

void logreg_gradient(std::span<const double> weights, double bias, const std::vector<DocumentVector>& xs,
                     const std::vector<Label>& ys, double l2_lambda, std::span<double> grad_w, double& grad_b) {
  check_dim(weights.size(), grad_w.size());
  std::fill(grad_w.begin(), grad_w.end(), 0.0);
  grad_b = 0.0;
  const double inv_n = 1.0 / static_cast<double>(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double residual = (sigmoid(dot(weights, xs[i]) + bias) - (ys[i] == Label::spam ? 1.0 : 0.0)) * inv_n;
    for (std::size_t j = 0; j < weights.size(); ++j) grad_w[j] += residual * xs[i][j];
    grad_b += residual;
  }
  for (std::size_t j = 0; j < weights.size(); ++j) grad_w[j] += l2_lambda * weights[j];
}

LogRegModel train_logreg(const std::vector<DocumentVector>& xs, const std::vector<Label>& ys,
                         const LogRegConfig& config) {
  const std::size_t dim = check_training_set(xs, ys);
  LogRegModel model;
  model.weights.assign(dim, 0.0);
  model.l2_lambda = config.l2_lambda;
  model.max_iter = config.max_iter;

  std::vector<double> grad_w(dim);
  double grad_b = 0.0;
  double previous = logreg_objective(model.weights, model.bias, xs, ys, config.l2_lambda);
  for (std::size_t it = 0; it < config.max_iter; ++it) {
    logreg_gradient(model.weights, model.bias, xs, ys, config.l2_lambda, grad_w, grad_b);
    for (std::size_t j = 0; j < dim; ++j) model.weights[j] -= config.lr * grad_w[j];
    model.bias -= config.lr * grad_b;
    model.iterations = it + 1;

    const double current = logreg_objective(model.weights, model.bias, xs, ys, config.l2_lambda);
    if (!std::isfinite(current)) {
      throw NumericError("logistic regression diverged at iteration " + std::to_string(it + 1) +
                         " (learning rate too large?)");
    }
    if (previous - current < config.tolerance) break;
    previous = current;
  }
  return model;
}

Prediction predict_logreg(const LogRegModel& model, std::span<const double> x) {
  check_dim(model.weights.size(), x.size());
  const double p = sigmoid(dot(model.weights, x) + model.bias);
  return {label_at_threshold(p, 0.5), p};
}

double svm_objective(std::span<const double> weights, double bias, const std::vector<DocumentVector>& xs,
                     const std::vector<Label>& ys, double c) {
  double hinge = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    hinge += std::max(0.0, 1.0 - sign_of(ys[i]) * (dot(weights, xs[i]) + bias));
  }
  return 0.5 * dot(weights, weights) + c * hinge;
}

LinearSvmModel train_linear_svm(const std::vector<DocumentVector>& xs, const std::vector<Label>& ys,
                                const SvmConfig& config) {
  const std::size_t dim = check_training_set(xs, ys);
  if (!(config.c > 0.0)) throw std::invalid_argument("SVM c must be > 0");
  const std::size_t n = xs.size();
  const double lambda = 1.0 / (config.c * static_cast<double>(n));

  std::vector<double> w(dim, 0.0), w_avg(dim, 0.0);
  double b = 0.0, b_avg = 0.0;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(config.seed);

  LinearSvmModel model;
  model.c = config.c;
  std::size_t t = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span(order));
    for (std::size_t i : order) {
      ++t;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const double y = sign_of(ys[i]);
      const bool violated = y * (dot(w, xs[i]) + b) < 1.0;
      const double shrink = 1.0 - eta * lambda;
      for (double& wj : w) wj *= shrink;
      if (violated) {
        for (std::size_t j = 0; j < dim; ++j) w[j] += eta * y * xs[i][j];
        b += eta * y;
      }
      const double inv_t = 1.0 / static_cast<double>(t);
      for (std::size_t j = 0; j < dim; ++j) w_avg[j] += (w[j] - w_avg[j]) * inv_t;
      b_avg += (b - b_avg) * inv_t;
    }
    model.epoch_objectives.push_back(svm_objective(w_avg, b_avg, xs, ys, config.c));
  }
  model.weights = std::move(w_avg);
  model.bias = b_avg;
  return model;
}

Prediction predict_svm(const LinearSvmModel& model, std::span<const double> x) {
  check_dim(model.weights.size(), x.size());
  const double score = dot(model.weights, x) + model.bias;
  return {label_at_threshold(score, 0.0), score};
}

}  // namespace spamclf

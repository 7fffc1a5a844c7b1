#include "spamclf/neural.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "spamclf/errors.hpp"
#include "spamclf/rng.hpp"

namespace spamclf {
namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double clamp_prob(double p) { return std::clamp(p, kProbClamp, 1.0 - kProbClamp); }

}  // namespace

LstmParams::LstmParams(const LstmShape& shape) : shape_(shape) {
  const std::size_t h = shape.hidden_dim;
  values_.assign(offset_output() + h + 1, 0.0);
}

std::size_t LstmParams::offset_input() const { return shape_.vocab_size * shape_.embed_dim; }
std::size_t LstmParams::offset_recurrent() const {
  return offset_input() + 4 * shape_.hidden_dim * shape_.embed_dim;
}
std::size_t LstmParams::offset_bias() const {
  return offset_recurrent() + 4 * shape_.hidden_dim * shape_.hidden_dim;
}
std::size_t LstmParams::offset_output() const { return offset_bias() + 4 * shape_.hidden_dim; }

LstmParams LstmParams::initialize(const LstmShape& shape, std::uint64_t seed) {
  LstmParams p(shape);
  Rng rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(shape.hidden_dim));
  for (double& v : p.values_) v = rng.uniform(-bound, bound);
  p.embedding().row(Vocabulary::kPadId).setZero();
  return p;
}

RowMatrixMap LstmParams::embedding() {
  return {values_.data(), static_cast<Eigen::Index>(shape_.vocab_size), static_cast<Eigen::Index>(shape_.embed_dim)};
}
ConstRowMatrixMap LstmParams::embedding() const {
  return {values_.data(), static_cast<Eigen::Index>(shape_.vocab_size), static_cast<Eigen::Index>(shape_.embed_dim)};
}
RowMatrixMap LstmParams::input_weights() {
  return {values_.data() + offset_input(), static_cast<Eigen::Index>(4 * shape_.hidden_dim),
          static_cast<Eigen::Index>(shape_.embed_dim)};
}
ConstRowMatrixMap LstmParams::input_weights() const {
  return {values_.data() + offset_input(), static_cast<Eigen::Index>(4 * shape_.hidden_dim),
          static_cast<Eigen::Index>(shape_.embed_dim)};
}
RowMatrixMap LstmParams::recurrent_weights() {
  return {values_.data() + offset_recurrent(), static_cast<Eigen::Index>(4 * shape_.hidden_dim),
          static_cast<Eigen::Index>(shape_.hidden_dim)};
}
ConstRowMatrixMap LstmParams::recurrent_weights() const {
  return {values_.data() + offset_recurrent(), static_cast<Eigen::Index>(4 * shape_.hidden_dim),
          static_cast<Eigen::Index>(shape_.hidden_dim)};
}
VectorMap LstmParams::gate_bias() {
  return {values_.data() + offset_bias(), static_cast<Eigen::Index>(4 * shape_.hidden_dim)};
}
ConstVectorMap LstmParams::gate_bias() const {
  return {values_.data() + offset_bias(), static_cast<Eigen::Index>(4 * shape_.hidden_dim)};
}
VectorMap LstmParams::output_weights() {
  return {values_.data() + offset_output(), static_cast<Eigen::Index>(shape_.hidden_dim)};
}
ConstVectorMap LstmParams::output_weights() const {
  return {values_.data() + offset_output(), static_cast<Eigen::Index>(shape_.hidden_dim)};
}

std::vector<LstmParams::Block> LstmParams::blocks() const {
  const std::size_t h = shape_.hidden_dim;
  return {
      {"embedding", 0, shape_.vocab_size, shape_.embed_dim},
      {"input_weights", offset_input(), 4 * h, shape_.embed_dim},
      {"recurrent_weights", offset_recurrent(), 4 * h, h},
      {"gate_bias", offset_bias(), 4 * h, 1},
      {"output_weights", offset_output(), h, 1},
      {"output_bias", offset_output() + h, 1, 1},
  };
}

LstmCache lstm_forward(const LstmParams& params, std::span<const IndexSequence> batch) {
  const auto& shape = params.shape();
  const auto h = static_cast<Eigen::Index>(shape.hidden_dim);
  const auto d = static_cast<Eigen::Index>(shape.embed_dim);
  const auto b = static_cast<Eigen::Index>(batch.size());
  const std::size_t steps = batch.empty() ? 0 : batch.front().size();
  for (const auto& seq : batch) {
    if (seq.size() != steps) throw std::invalid_argument("lstm_forward: sequences differ in length");
    for (TokenId id : seq) {
      if (id < 0 || static_cast<std::size_t>(id) >= shape.vocab_size) {
        throw std::invalid_argument("lstm_forward: token id " + std::to_string(id) + " out of range");
      }
    }
  }

  LstmCache cache;
  cache.inputs.assign(batch.begin(), batch.end());
  cache.hidden.push_back(Eigen::MatrixXd::Zero(h, b));
  cache.cell.push_back(Eigen::MatrixXd::Zero(h, b));

  const auto emb = params.embedding();
  const auto w_x = params.input_weights();
  const auto w_h = params.recurrent_weights();
  const auto bias = params.gate_bias();

  for (std::size_t t = 0; t < steps; ++t) {
    Eigen::MatrixXd x(d, b);
    for (Eigen::Index col = 0; col < b; ++col) {
      x.col(col) = emb.row(batch[static_cast<std::size_t>(col)][t]).transpose();
    }
    // Coefficient-wise products sum each entry in the same order for any
    // batch width, so outputs do not depend on how inputs are batched.
    Eigen::MatrixXd z = w_x.lazyProduct(x);
    z.noalias() += w_h.lazyProduct(cache.hidden.back());
    z.colwise() += bias;

    z.topRows(2 * h) = z.topRows(2 * h).unaryExpr(&sigmoid);
    z.middleRows(2 * h, h) = z.middleRows(2 * h, h).array().tanh().matrix();
    z.bottomRows(h) = z.bottomRows(h).unaryExpr(&sigmoid);

    Eigen::MatrixXd c = z.middleRows(h, h).cwiseProduct(cache.cell.back()) +
                        z.topRows(h).cwiseProduct(z.middleRows(2 * h, h));
    Eigen::MatrixXd c_tanh = c.array().tanh().matrix();
    Eigen::MatrixXd hidden = z.bottomRows(h).cwiseProduct(c_tanh);

    cache.embedded.push_back(std::move(x));
    cache.gates.push_back(std::move(z));
    cache.cell.push_back(std::move(c));
    cache.cell_tanh.push_back(std::move(c_tanh));
    cache.hidden.push_back(std::move(hidden));
  }

  cache.probs.resize(static_cast<std::size_t>(b));
  for (Eigen::Index col = 0; col < b; ++col) {
    const double logit = cache.hidden.back().col(col).dot(params.output_weights());
    cache.probs[static_cast<std::size_t>(col)] = sigmoid(logit + params.output_bias());
  }
  return cache;
}

double bce_loss(std::span<const double> probs, std::span<const int> targets) {
  if (probs.size() != targets.size()) throw std::invalid_argument("bce_loss: length mismatch");
  if (probs.empty()) throw std::invalid_argument("bce_loss: empty batch");
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = clamp_prob(probs[i]);
    total -= targets[i] == 1 ? std::log(p) : std::log(1.0 - p);
  }
  return total / static_cast<double>(probs.size());
}

LstmGradients lstm_backward(const LstmParams& params, const LstmCache& cache, std::span<const int> targets) {
  if (targets.size() != cache.probs.size()) throw std::invalid_argument("lstm_backward: cache/target mismatch");
  const auto& shape = params.shape();
  const auto h = static_cast<Eigen::Index>(shape.hidden_dim);
  const auto b = static_cast<Eigen::Index>(targets.size());
  const std::size_t steps = cache.gates.size();

  LstmGradients grads(shape);
  auto g_emb = grads.embedding();
  auto g_wx = grads.input_weights();
  auto g_wh = grads.recurrent_weights();
  auto g_bias = grads.gate_bias();
  const auto w_x = params.input_weights();
  const auto w_h = params.recurrent_weights();

  Eigen::VectorXd d_logit(b);
  for (Eigen::Index col = 0; col < b; ++col) {
    const double p = cache.probs[static_cast<std::size_t>(col)];
    const bool clamped = p < kProbClamp || p > 1.0 - kProbClamp;
    d_logit(col) = clamped ? 0.0 : (p - targets[static_cast<std::size_t>(col)]) / static_cast<double>(b);
  }
  grads.output_weights() = cache.hidden.back() * d_logit;
  grads.output_bias() = d_logit.sum();

  Eigen::MatrixXd d_h = params.output_weights() * d_logit.transpose();
  Eigen::MatrixXd d_c = Eigen::MatrixXd::Zero(h, b);
  Eigen::MatrixXd d_z(4 * h, b);

  for (std::size_t t = steps; t-- > 0;) {
    const auto& z = cache.gates[t];
    const auto in_gate = z.topRows(h).array();
    const auto forget = z.middleRows(h, h).array();
    const auto candidate = z.middleRows(2 * h, h).array();
    const auto out_gate = z.bottomRows(h).array();
    const auto c_tanh = cache.cell_tanh[t].array();

    d_c.array() += d_h.array() * out_gate * (1.0 - c_tanh.square());
    d_z.topRows(h) = (d_c.array() * candidate * in_gate * (1.0 - in_gate)).matrix();
    d_z.middleRows(h, h) = (d_c.array() * cache.cell[t].array() * forget * (1.0 - forget)).matrix();
    d_z.middleRows(2 * h, h) = (d_c.array() * in_gate * (1.0 - candidate.square())).matrix();
    d_z.bottomRows(h) = (d_h.array() * c_tanh * out_gate * (1.0 - out_gate)).matrix();

    g_wx.noalias() += d_z * cache.embedded[t].transpose();
    g_wh.noalias() += d_z * cache.hidden[t].transpose();
    g_bias += d_z.rowwise().sum();

    const Eigen::MatrixXd d_x = w_x.transpose() * d_z;
    for (Eigen::Index col = 0; col < b; ++col) {
      const TokenId id = cache.inputs[static_cast<std::size_t>(col)][t];
      if (id != Vocabulary::kPadId) g_emb.row(id) += d_x.col(col).transpose();
    }
    d_h.noalias() = w_h.transpose() * d_z;
    d_c.array() *= forget;
  }
  g_emb.row(Vocabulary::kPadId).setZero();
  return grads;
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state) {
  if (params.size() != grads.size() || state.first_moment.size() != params.size() ||
      state.second_moment.size() != params.size()) {
    throw std::invalid_argument("adam_step: shape mismatch");
  }
  for (double g : grads) {
    if (!std::isfinite(g)) throw NumericError("adam_step: non-finite gradient");
  }
  const auto& cfg = state.config;
  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double correction1 = 1.0 - std::pow(cfg.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * grads[i];
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * grads[i] * grads[i];
    params[i] -= cfg.lr * (m / correction1) / (std::sqrt(v / correction2) + cfg.eps);
  }
}

double clip_gradient_norm(std::span<double> grads, double max_norm) {
  double sq = 0.0;
  for (double g : grads) sq += g * g;
  const double norm = std::sqrt(sq);
  if (norm > max_norm && max_norm > 0.0) {
    const double scale = max_norm / norm;
    for (double& g : grads) g *= scale;
  }
  return norm;
}

LstmTrainResult train_lstm(const std::vector<IndexSequence>& xs, const std::vector<int>& ys, std::size_t vocab_size,
                           const LstmTrainConfig& config, const EpochCallback& on_epoch) {
  if (xs.size() != ys.size()) throw DataError("train_lstm: sequence and label counts differ");
  if (xs.empty()) throw DataError("train_lstm: empty training set");
  const bool has_pos = std::find(ys.begin(), ys.end(), 1) != ys.end();
  const bool has_neg = std::find(ys.begin(), ys.end(), 0) != ys.end();
  if (!has_pos || !has_neg) throw DataError("train_lstm: training set contains a single class");
  if (config.batch_size == 0) throw std::invalid_argument("train_lstm: batch_size must be > 0");

  LstmTrainResult result{LstmParams::initialize({vocab_size, config.embed_dim, config.hidden_dim}, config.seed), {}};
  auto& params = result.params;
  AdamState adam(params.values().size(), config.adam);
  Rng order_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<IndexSequence> batch_x;
  std::vector<int> batch_y;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    order_rng.shuffle(std::span(order));
    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      batch_x.clear();
      batch_y.clear();
      for (std::size_t k = begin; k < end; ++k) {
        batch_x.push_back(xs[order[k]]);
        batch_y.push_back(ys[order[k]]);
      }
      const auto cache = lstm_forward(params, batch_x);
      const double loss = bce_loss(cache.probs, batch_y);
      if (!std::isfinite(loss)) throw NumericError("train_lstm: non-finite loss in epoch " + std::to_string(epoch));
      auto grads = lstm_backward(params, cache, batch_y);
      clip_gradient_norm(grads.values(), config.clip_norm);
      try {
        adam_step(params.values(), grads.values(), adam);
      } catch (const NumericError& e) {
        throw NumericError(std::string(e.what()) + " in epoch " + std::to_string(epoch));
      }
      loss_sum += loss * static_cast<double>(end - begin);
    }
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    result.log.push_back({epoch, loss_sum / static_cast<double>(xs.size()), elapsed.count()});
    if (on_epoch) on_epoch(result.log.back());
  }
  return result;
}

std::vector<Prediction> predict_lstm(const LstmParams& params, std::span<const IndexSequence> batch,
                                     std::size_t batch_size) {
  std::vector<Prediction> out;
  out.reserve(batch.size());
  batch_size = std::max<std::size_t>(batch_size, 1);
  for (std::size_t begin = 0; begin < batch.size(); begin += batch_size) {
    const std::size_t n = std::min(batch_size, batch.size() - begin);
    const auto cache = lstm_forward(params, batch.subspan(begin, n));
    for (double p : cache.probs) out.push_back({label_at_threshold(p, 0.5), p});
  }
  return out;
}

}  // namespace spamclf

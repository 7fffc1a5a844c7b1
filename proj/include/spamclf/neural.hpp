#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "spamclf/embedding.hpp"
#include "spamclf/prediction.hpp"

namespace spamclf {

struct LstmShape {
  std::size_t vocab_size = 0;
  std::size_t embed_dim = 64;
  std::size_t hidden_dim = 64;

  bool operator==(const LstmShape&) const = default;
};

using RowMatrixMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ConstRowMatrixMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using VectorMap = Eigen::Map<Eigen::VectorXd>;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

// All trainable state of the classifier in one flat buffer, laid out as
//   embedding          vocab_size x embed_dim
//   input_weights      4*hidden x embed_dim    gate blocks in order i, f, g, o
//   recurrent_weights  4*hidden x hidden
//   gate_bias          4*hidden
//   output_weights     hidden
//   output_bias        1
// Gradients use the same type.
class LstmParams {
 public:
  LstmParams() = default;
  explicit LstmParams(const LstmShape& shape);

  // Uniform(-1/sqrt(hidden), 1/sqrt(hidden)) everywhere except the padding
  // row of the embedding, which is zero.
  static LstmParams initialize(const LstmShape& shape, std::uint64_t seed);

  const LstmShape& shape() const { return shape_; }

  RowMatrixMap embedding();
  ConstRowMatrixMap embedding() const;
  RowMatrixMap input_weights();
  ConstRowMatrixMap input_weights() const;
  RowMatrixMap recurrent_weights();
  ConstRowMatrixMap recurrent_weights() const;
  VectorMap gate_bias();
  ConstVectorMap gate_bias() const;
  VectorMap output_weights();
  ConstVectorMap output_weights() const;
  double& output_bias() { return values_.back(); }
  double output_bias() const { return values_.back(); }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  struct Block {
    const char* name;
    std::size_t offset;
    std::size_t rows;
    std::size_t cols;
  };
  // The six blocks above with their offsets into values().
  std::vector<Block> blocks() const;

  bool operator==(const LstmParams&) const = default;

 private:
  std::size_t offset_input() const;
  std::size_t offset_recurrent() const;
  std::size_t offset_bias() const;
  std::size_t offset_output() const;

  LstmShape shape_;
  std::vector<double> values_;
};

using LstmGradients = LstmParams;

// Activations of one forward pass, one entry per time step. Columns are
// batch members.
struct LstmCache {
  std::vector<IndexSequence> inputs;
  std::vector<Eigen::MatrixXd> embedded;  // embed_dim x batch
  std::vector<Eigen::MatrixXd> gates;     // 4*hidden x batch, post-activation
  std::vector<Eigen::MatrixXd> cell;      // hidden x batch
  std::vector<Eigen::MatrixXd> hidden;    // hidden x batch; hidden[0] is the zero initial state
  std::vector<Eigen::MatrixXd> cell_tanh;
  std::vector<double> probs;
};

// Runs the recurrence over every position (padding included) and scores
// the final hidden state with sigmoid(out_w . h + out_b). Sequences in one
// batch must share a length. Throws std::invalid_argument on an
// out-of-range id or ragged batch.
LstmCache lstm_forward(const LstmParams& params, std::span<const IndexSequence> batch);

inline constexpr double kProbClamp = 1e-7;

// Mean binary cross-entropy with probabilities clamped to
// [kProbClamp, 1 - kProbClamp]. Throws std::invalid_argument on a length
// mismatch.
double bce_loss(std::span<const double> probs, std::span<const int> targets);

// Exact gradient of bce_loss(lstm_forward(params, batch)) by
// backpropagation through time. Clamped probabilities contribute no
// gradient; the padding embedding row always gets zero.
LstmGradients lstm_backward(const LstmParams& params, const LstmCache& cache, std::span<const int> targets);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::uint64_t step_count = 0;

  AdamState() = default;
  AdamState(std::size_t size, const AdamConfig& cfg)
      : config(cfg), first_moment(size, 0.0), second_moment(size, 0.0) {}
};

// One bias-corrected Adam update in place. Throws NumericError on a
// non-finite gradient, leaving params and state untouched.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state);

// Rescales grads so their global L2 norm is at most max_norm. Returns the
// norm before clipping.
double clip_gradient_norm(std::span<double> grads, double max_norm);

struct LstmTrainConfig {
  std::size_t embed_dim = 64;
  std::size_t hidden_dim = 64;
  std::size_t batch_size = 32;
  std::size_t epochs = 30;
  AdamConfig adam;
  double clip_norm = 5.0;
  std::uint64_t seed = 42;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double mean_loss = 0.0;
  double seconds = 0.0;
};

using TrainLog = std::vector<EpochRecord>;

struct LstmTrainResult {
  LstmParams params;
  TrainLog log;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Seeded shuffle each epoch, mini-batches of batch_size (last partial
// batch kept), clipped gradients, Adam. Throws DataError for an empty or
// single-class set and NumericError on a non-finite loss.
LstmTrainResult train_lstm(const std::vector<IndexSequence>& xs, const std::vector<int>& ys, std::size_t vocab_size,
                           const LstmTrainConfig& config, const EpochCallback& on_epoch = {});

// label = spam iff probability >= 0.5; score = probability.
std::vector<Prediction> predict_lstm(const LstmParams& params, std::span<const IndexSequence> batch,
                                     std::size_t batch_size = 256);

}  // namespace spamclf

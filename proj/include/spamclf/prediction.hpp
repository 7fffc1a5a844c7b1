#pragma once

#include "spamclf/corpus.hpp"

namespace spamclf {

// Score is model-specific but always increases with spam-likeness:
// log-posterior margin (NB), probability (LR, LSTM), decision value (SVM).
struct Prediction {
  Label label = Label::ham;
  double score = 0.0;

  bool operator==(const Prediction&) const = default;
};

// The decision threshold itself counts as spam.
inline Label label_at_threshold(double score, double threshold) {
  return score >= threshold ? Label::spam : Label::ham;
}

}  // namespace spamclf

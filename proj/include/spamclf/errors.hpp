#pragma once

#include <stdexcept>
#include <string>

namespace spamclf {

// Bad input data: malformed files, unknown labels, empty corpora.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Divergence or non-finite values during training.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace spamclf

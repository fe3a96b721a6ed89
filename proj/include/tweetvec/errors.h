#ifndef TWEETVEC_ERRORS_H_
#define TWEETVEC_ERRORS_H_

#include <stdexcept>
#include <string>

namespace tweetvec {

// Bad input data: malformed corpus lines, duplicate ids, corrupt checkpoints.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A loss or parameter became NaN/Inf during training.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration values (epochs = 0, C_T < 1, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace tweetvec

#endif  // TWEETVEC_ERRORS_H_

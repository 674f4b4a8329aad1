#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace abstain {

/// Bad input data or out-of-range parameters. Carries the offending record
/// index when the failure is tied to one example.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what)
      : std::invalid_argument(what) {}
  ValidationError(std::size_t record, const std::string& what)
      : std::invalid_argument("record " + std::to_string(record) + ": " + what),
        record_(record) {}

  std::optional<std::size_t> record() const noexcept { return record_; }

 private:
  std::optional<std::size_t> record_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training produced a non-finite loss.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(int epoch, double learning_rate)
      : std::runtime_error("training diverged at epoch " + std::to_string(epoch) +
                           " (learning rate " + std::to_string(learning_rate) + ")"),
        epoch_(epoch),
        learning_rate_(learning_rate) {}

  int epoch() const noexcept { return epoch_; }
  double learning_rate() const noexcept { return learning_rate_; }

 private:
  int epoch_;
  double learning_rate_;
};

}  // namespace abstain

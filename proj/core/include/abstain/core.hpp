#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace abstain {

/// One annotated prediction of the fixed upstream model.
struct Example {
  std::vector<double> features;
  int annotation = 1;  // +1 acceptable output, -1 not
  std::optional<double> score;
  std::optional<std::string> meta;
};

/// Validated, immutable collection of examples sharing one feature dimension.
class Dataset {
 public:
  std::span<const Example> examples() const noexcept { return examples_; }
  const Example& operator[](std::size_t i) const { return examples_[i]; }
  std::size_t size() const noexcept { return examples_.size(); }
  std::size_t dim() const noexcept { return dim_; }

  double positive_rate() const noexcept;
  bool has_scores() const noexcept;
  std::vector<int> annotations() const;

  /// Examples at `indices`, in that order.
  Dataset subset(std::span<const std::size_t> indices) const;

 private:
  friend Dataset make_dataset(std::vector<Example> records);
  std::vector<Example> examples_;
  std::size_t dim_ = 0;
};

/// Validates records and infers the dimension from the first one. Throws
/// ValidationError naming the offending record.
Dataset make_dataset(std::vector<Example> records);

/// Rejection cost and surrogate shape parameters with their derived constants.
class RejectionParams {
 public:
  double c() const noexcept { return c_; }
  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }
  /// c e^{alpha/2} + (1-c) e^{-alpha/2}
  double i_bar() const noexcept { return i_bar_; }
  /// alpha / (alpha + 2 beta)
  double gamma() const noexcept { return gamma_; }
  /// |2 beta c / alpha - i_bar| <= 1e-9
  bool constraint_satisfied() const noexcept { return constraint_satisfied_; }

 private:
  friend RejectionParams make_params(double, double, std::optional<double>);
  double c_ = 0;
  double alpha_ = 0;
  double beta_ = 0;
  double i_bar_ = 0;
  double gamma_ = 0;
  bool constraint_satisfied_ = false;
};

inline constexpr double kConstraintTolerance = 1e-9;

/// When `beta` is absent it is solved from 2 beta c / alpha = i_bar.
RejectionParams make_params(double c, double alpha, std::optional<double> beta = std::nullopt);

struct Folds {
  std::vector<std::size_t> assignments;  // fold index per example
  std::size_t k = 0;

  std::vector<std::size_t> test_indices(std::size_t fold) const;
  std::vector<std::size_t> train_indices(std::size_t fold) const;
  std::vector<std::size_t> sizes() const;
};

/// Seeded shuffle, then round-robin assignment: fold sizes differ by at most 1.
Folds kfold_split(const Dataset& dataset, std::size_t k, std::uint64_t seed);

struct TrainValidationSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

/// Single seeded split; `validation_size` examples go to validation.
TrainValidationSplit train_validation_split(const Dataset& dataset, std::size_t validation_size,
                                            std::uint64_t seed);

}  // namespace abstain

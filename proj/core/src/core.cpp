#include "abstain/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "abstain/errors.hpp"

namespace abstain {

double Dataset::positive_rate() const noexcept {
  if (examples_.empty()) return 0.0;
  const auto positives = std::count_if(examples_.begin(), examples_.end(),
                                       [](const Example& e) { return e.annotation == 1; });
  return static_cast<double>(positives) / static_cast<double>(examples_.size());
}

bool Dataset::has_scores() const noexcept {
  return std::all_of(examples_.begin(), examples_.end(),
                     [](const Example& e) { return e.score.has_value(); });
}

std::vector<int> Dataset::annotations() const {
  std::vector<int> out;
  out.reserve(examples_.size());
  for (const auto& e : examples_) out.push_back(e.annotation);
  return out;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.dim_ = dim_;
  out.examples_.reserve(indices.size());
  for (auto i : indices) out.examples_.push_back(examples_.at(i));
  return out;
}

Dataset make_dataset(std::vector<Example> records) {
  if (records.empty()) throw ValidationError("dataset has no records");
  const std::size_t dim = records.front().features.size();
  if (dim == 0) throw ValidationError(0, "empty feature vector");
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.features.size() != dim) {
      throw ValidationError(i, "dimension mismatch: expected " + std::to_string(dim) + ", got " +
                                   std::to_string(r.features.size()));
    }
    if (r.annotation != 1 && r.annotation != -1) {
      throw ValidationError(i, "invalid annotation " + std::to_string(r.annotation) +
                                   " (must be -1 or +1)");
    }
    for (double v : r.features) {
      if (!std::isfinite(v)) throw ValidationError(i, "non-finite feature value");
    }
    if (r.score && !std::isfinite(*r.score)) throw ValidationError(i, "non-finite score");
  }
  Dataset d;
  d.dim_ = dim;
  d.examples_ = std::move(records);
  return d;
}

RejectionParams make_params(double c, double alpha, std::optional<double> beta) {
  if (!(c > 0.0 && c < 1.0)) {
    throw ValidationError("cost c must lie in (0, 1), got " + std::to_string(c));
  }
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw ValidationError("alpha must be positive and finite, got " + std::to_string(alpha));
  }
  if (beta && (!(*beta > 0.0) || !std::isfinite(*beta))) {
    throw ValidationError("beta must be positive and finite, got " + std::to_string(*beta));
  }
  RejectionParams p;
  p.c_ = c;
  p.alpha_ = alpha;
  p.i_bar_ = c * std::exp(alpha / 2.0) + (1.0 - c) * std::exp(-alpha / 2.0);
  p.beta_ = beta ? *beta : alpha * p.i_bar_ / (2.0 * c);
  p.gamma_ = alpha / (alpha + 2.0 * p.beta_);
  p.constraint_satisfied_ =
      std::abs(2.0 * p.beta_ * c / alpha - p.i_bar_) <= kConstraintTolerance;
  return p;
}

std::vector<std::size_t> Folds::test_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> Folds::train_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] != fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> Folds::sizes() const {
  std::vector<std::size_t> out(k, 0);
  for (auto f : assignments) ++out[f];
  return out;
}

namespace {

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  return perm;
}

}  // namespace

Folds kfold_split(const Dataset& dataset, std::size_t k, std::uint64_t seed) {
  const std::size_t n = dataset.size();
  if (k < 2 || k > n) {
    throw ValidationError("fold count k must lie in [2, " + std::to_string(n) + "], got " +
                          std::to_string(k));
  }
  const auto perm = shuffled_indices(n, seed);
  Folds folds;
  folds.k = k;
  folds.assignments.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) folds.assignments[perm[i]] = i % k;
  return folds;
}

TrainValidationSplit train_validation_split(const Dataset& dataset, std::size_t validation_size,
                                            std::uint64_t seed) {
  const std::size_t n = dataset.size();
  if (validation_size == 0 || validation_size >= n) {
    throw ValidationError("validation size must lie in [1, " + std::to_string(n - 1) + "]");
  }
  const auto perm = shuffled_indices(n, seed);
  TrainValidationSplit split;
  split.validation.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(validation_size));
  split.train.assign(perm.begin() + static_cast<std::ptrdiff_t>(validation_size), perm.end());
  std::sort(split.validation.begin(), split.validation.end());
  std::sort(split.train.begin(), split.train.end());
  return split;
}

}  // namespace abstain

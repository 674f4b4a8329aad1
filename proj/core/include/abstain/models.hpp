#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "abstain/core.hpp"

namespace abstain {

enum class RejectorKind { kConstant, kLinear, kMlp1, kScoreOffset };

std::string_view to_string(RejectorKind kind);
RejectorKind parse_rejector_kind(std::string_view name);

/// A real-valued rejector; the prediction is accepted iff its value is > 0.
///
/// Parameters live in one flat vector whose layout depends on the kind:
///   constant      [bias]
///   linear        [w_0 .. w_{d-1}, bias]
///   mlp1          [W (hidden x d, row-major), hidden biases (hidden),
///                  output weights (hidden), output bias]
///   score_offset  [offset]
/// constant and score_offset report dim() == 0 (they ignore features).
class Rejector {
 public:
  static Rejector constant(double bias);
  static Rejector linear(std::vector<double> weights, double bias);
  static Rejector mlp1(std::size_t dim, std::size_t hidden, std::vector<double> parameters);
  static Rejector score_offset(double offset);
  /// Validates the parameter count for the kind.
  static Rejector from_parameters(RejectorKind kind, std::size_t dim, std::size_t hidden,
                                  std::vector<double> parameters);

  RejectorKind kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t hidden_width() const noexcept { return hidden_; }
  std::span<const double> parameters() const noexcept { return params_; }
  std::size_t parameter_count() const noexcept { return params_.size(); }
  bool trainable() const noexcept { return kind_ != RejectorKind::kScoreOffset; }

  /// Same architecture, new parameters.
  Rejector with_parameters(std::vector<double> parameters) const;

  /// Value on a feature vector. Not valid for score_offset.
  double evaluate(std::span<const double> features) const;

  /// Adds upstream * d evaluate / d theta into `out` (size parameter_count()).
  void accumulate_gradient(std::span<const double> features, double upstream,
                           std::span<double> out) const;

  friend bool operator==(const Rejector&, const Rejector&) = default;

 private:
  Rejector(RejectorKind kind, std::size_t dim, std::size_t hidden, std::vector<double> params);

  RejectorKind kind_ = RejectorKind::kConstant;
  std::size_t dim_ = 0;
  std::size_t hidden_ = 0;
  std::vector<double> params_;
};

/// constant -> bias; linear -> w.x + bias; mlp1 -> output layer over tanh
/// hidden units; score_offset -> score - offset.
double predict(const Rejector& rejector, const Example& example);

/// Gradient of predict w.r.t. the flat parameters, scaled by `upstream`.
std::vector<double> param_grad(const Rejector& rejector, const Example& example, double upstream);

struct RejectorSpec {
  RejectorKind kind = RejectorKind::kLinear;
  std::size_t hidden = 16;
  double offset = 0.5;  // score_offset only
};

/// constant starts at 0; linear/mlp1 draw uniform in [-s, s], s = 1/sqrt(fan-in).
Rejector init_rejector(const RejectorSpec& spec, std::size_t dim, std::uint64_t seed);

/// {"variant": ..., "dim": d, "hidden": h, "parameters": [...]}
nlohmann::json rejector_to_json(const Rejector& rejector);
Rejector rejector_from_json(const nlohmann::json& j);

}  // namespace abstain

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "abstain/core.hpp"
#include "abstain/models.hpp"

namespace abstain {

struct TrainConfig {
  double learning_rate = 1e-2;
  int epochs = 500;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
  double l2_penalty = 0.0;
  /// Batch gradients with a larger Euclidean norm are rescaled to this norm;
  /// 0 disables clipping. Far from the minimizer the exponential surrogate's
  /// gradient grows like e^{beta |r|}, which a fixed step cannot absorb.
  double max_grad_norm = 1.0;
};

void validate(const TrainConfig& cfg);

struct TrainReport {
  Rejector rejector;
  std::vector<double> loss_trace;  // mean objective per epoch, one entry per epoch
  bool converged = false;
  std::vector<std::string> warnings;
};

/// Mini-batch gradient descent on mean surrogate loss + l2_penalty ||theta||^2.
/// The result is used with threshold 0. Examples are put in a canonical
/// order before the seeded shuffle, so input order does not matter.
/// Throws DivergenceError on a non-finite loss or when a surrogate exponent
/// reaches the clamp (the clamped loss has no useful gradient there).
TrainReport train_surrogate(const Dataset& dataset, const RejectionParams& params,
                            const Rejector& initial, const TrainConfig& cfg);

/// Same optimizer on mean binary cross-entropy of sigmoid(r) against (a + 1) / 2.
/// The output is a score and needs a fitted threshold.
TrainReport train_cross_entropy(const Dataset& dataset, const Rejector& initial,
                                const TrainConfig& cfg);

/// Mean surrogate loss of `rejector` over the dataset, and its gradient.
double surrogate_objective(const Rejector& rejector, const Dataset& dataset,
                           const RejectionParams& params);
std::vector<double> surrogate_objective_gradient(const Rejector& rejector, const Dataset& dataset,
                                                 const RejectionParams& params);

/// Max relative error between the analytic gradient of surrogate_objective and
/// central finite differences with step eps, over all parameters. The
/// denominator is max(|analytic|, |numeric|, kGradCheckFloor).
inline constexpr double kGradCheckFloor = 1e-3;
double grad_check(const Rejector& rejector, const Dataset& dataset, const RejectionParams& params,
                  double eps);

nlohmann::json report_to_json(const TrainReport& report);

}  // namespace abstain

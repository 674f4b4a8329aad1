#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "abstain/core.hpp"
#include "abstain/models.hpp"

namespace abstain::synthetic {

enum class TaskKind { kConstantEta, kLogistic, kPiecewise };

struct FeatureLaw {
  enum class Kind { kUniformBox, kStandardNormal };
  Kind kind = Kind::kUniformBox;
  std::size_t dim = 1;
  double low = -1.0;  // uniform box bounds, per coordinate
  double high = 1.0;
};

/// A distribution over (x, a) with known eta(x) = P(a = +1 | x).
///   constant-eta  eta(x) = eta
///   logistic      eta(x) = 1 / (1 + exp(-(w.x + bias)))
///   piecewise     eta(x) = levels[i] for x_0 in [breakpoints[i-1], breakpoints[i])
struct SyntheticTask {
  std::string name;
  TaskKind kind = TaskKind::kConstantEta;
  double eta = 0.5;
  std::vector<double> weights;
  double bias = 0.0;
  std::vector<double> breakpoints;
  std::vector<double> levels;
  FeatureLaw x_law;
  double c = 0.05;
  /// When set, sample() also writes score = eta(x) + U(-noise, noise).
  std::optional<double> score_noise;
};

/// Throws ValidationError for inconsistent or non-finite parameters.
void validate(const SyntheticTask& task);

double eta_at(const SyntheticTask& task, std::span<const double> x);

/// Exact for constant-eta and piecewise tasks; Monte-Carlo (10^6 draws) for logistic.
double positive_rate(const SyntheticTask& task);

/// Draws x from the feature law, then a = +1 with probability eta(x).
Dataset sample(const SyntheticTask& task, std::size_t n, std::uint64_t seed);

/// Dataset whose positive rate is exactly round(eta n) / n, for constant-eta
/// tasks. Examples are drawn from the feature law; annotations are a seeded
/// permutation of the exact label counts.
Dataset sample_exact_rate(const SyntheticTask& task, std::size_t n, std::uint64_t seed);

struct Estimate {
  double mean = 0.0;
  double se = 0.0;  // standard error of the mean
};

enum class LossKind { kRejection, kSurrogate };

using RejectorFn = std::function<double(std::span<const double>)>;

/// Bayes rejector eta(x) - (1 - c) of the task, as a function of features.
RejectorFn bayes_rejector_fn(const SyntheticTask& task, double c);
RejectorFn as_function(const Rejector& rejector);

struct RiskPair {
  Estimate rejection;
  Estimate surrogate;
};

/// E_x[min{c, 1 - eta(x)}] and E_x[C*_surrogate(x)], averaging closed-form
/// conditional minima over sampled x. Needs n_mc >= 1000.
RiskPair bayes_risks(const SyntheticTask& task, const RejectionParams& params, std::size_t n_mc,
                     std::uint64_t seed);

/// E_x[eta(x) l(r(x), +1) + (1 - eta(x)) l(r(x), -1)]: x is sampled, a is
/// marginalized exactly.
Estimate risk_of(const Rejector& rejector, const SyntheticTask& task, LossKind loss,
                 const RejectionParams& params, std::size_t n_mc, std::uint64_t seed);
Estimate risk_of(const RejectorFn& rejector, const SyntheticTask& task, LossKind loss,
                 const RejectionParams& params, std::size_t n_mc, std::uint64_t seed);

/// Paired estimate of R(r) - R* for both losses over the same x draws as
/// risk_of / bayes_risks with the same seed.
RiskPair excess_risks(const RejectorFn& rejector, const SyntheticTask& task,
                      const RejectionParams& params, std::size_t n_mc, std::uint64_t seed);

/// constant-eta {0.5, 0.8, 0.89, 0.95, 0.99}, 1-D logistic (w = 4, b = 0) and
/// the 2-level piecewise task eta in {0.6, 0.98} with positive rate 0.89.
std::vector<SyntheticTask> default_tasks();
SyntheticTask default_task(const std::string& name);

nlohmann::json task_to_json(const SyntheticTask& task);
SyntheticTask task_from_json(const nlohmann::json& j);

/// Accepts a default task name ("constant:0.8", "logistic", "piecewise") or
/// an inline JSON object.
SyntheticTask parse_task(const std::string& spec);

}  // namespace abstain::synthetic

#include "abstain/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "abstain/errors.hpp"
#include "abstain/losses.hpp"

namespace abstain {

void validate(const TrainConfig& cfg) {
  if (!(cfg.learning_rate > 0.0) || !std::isfinite(cfg.learning_rate)) {
    throw ValidationError("learning rate must be positive");
  }
  if (cfg.epochs < 1) throw ValidationError("epochs must be >= 1");
  if (cfg.batch_size < 1) throw ValidationError("batch size must be >= 1");
  if (!(cfg.l2_penalty >= 0.0) || !std::isfinite(cfg.l2_penalty)) {
    throw ValidationError("l2 penalty must be >= 0");
  }
  if (!(cfg.max_grad_norm >= 0.0) || !std::isfinite(cfg.max_grad_norm)) {
    throw ValidationError("max gradient norm must be >= 0");
  }
}

namespace {

struct PointLoss {
  double value;
  double slope;  // d value / d r
  bool saturated = false;
};

bool example_less(const Example& a, const Example& b) {
  if (a.features != b.features) return a.features < b.features;
  if (a.annotation != b.annotation) return a.annotation < b.annotation;
  return a.score.value_or(0.0) < b.score.value_or(0.0);
}

std::vector<std::size_t> canonical_order(const Dataset& dataset) {
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return example_less(dataset[i], dataset[j]);
  });
  return order;
}

double squared_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

template <typename LossFn>
TrainReport gradient_descent(const Dataset& dataset, const Rejector& initial,
                             const TrainConfig& cfg, LossFn loss) {
  validate(cfg);
  if (!initial.trainable()) throw ValidationError("rejector variant is not trainable");
  if (initial.dim() != 0 && initial.dim() != dataset.dim()) {
    throw ValidationError("rejector dim does not match dataset dim");
  }
  const std::size_t n = dataset.size();
  const std::size_t batch = std::min(cfg.batch_size, n);
  auto order = canonical_order(dataset);
  std::mt19937_64 rng(cfg.seed);

  std::vector<double> theta(initial.parameters().begin(), initial.parameters().end());
  Rejector current = initial;
  std::vector<double> grad(theta.size());
  TrainReport report{initial, {}, false, {}};
  report.loss_trace.reserve(static_cast<std::size_t>(cfg.epochs));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (batch < n) std::shuffle(order.begin(), order.end(), rng);
    long double epoch_total = 0.0L;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t stop = std::min(start + batch, n);
      const double scale = 1.0 / static_cast<double>(stop - start);
      std::fill(grad.begin(), grad.end(), 0.0);
      long double batch_total = 0.0L;
      bool saturated = false;
      for (std::size_t k = start; k < stop; ++k) {
        const Example& e = dataset[order[k]];
        const double r = current.evaluate(e.features);
        const PointLoss pl = loss(r, e.annotation);
        batch_total += pl.value;
        saturated = saturated || pl.saturated;
        current.accumulate_gradient(e.features, pl.slope * scale, grad);
      }
      const double penalty = cfg.l2_penalty * squared_norm(theta);
      const double batch_loss = static_cast<double>(batch_total) * scale + penalty;
      if (!std::isfinite(batch_loss) || saturated) throw DivergenceError(epoch, cfg.learning_rate);
      for (std::size_t p = 0; p < theta.size(); ++p) grad[p] += 2.0 * cfg.l2_penalty * theta[p];
      if (cfg.max_grad_norm > 0.0) {
        const double norm = std::sqrt(squared_norm(grad));
        if (norm > cfg.max_grad_norm) {
          for (double& g : grad) g *= cfg.max_grad_norm / norm;
        }
      }
      epoch_total += static_cast<long double>(batch_loss) * static_cast<long double>(stop - start);
      for (std::size_t p = 0; p < theta.size(); ++p) {
        theta[p] -= cfg.learning_rate * grad[p];
        if (!std::isfinite(theta[p])) throw DivergenceError(epoch, cfg.learning_rate);
      }
      current = current.with_parameters(theta);
    }
    report.loss_trace.push_back(static_cast<double>(epoch_total / static_cast<long double>(n)));
  }
  report.rejector = current;
  const auto& trace = report.loss_trace;
  report.converged = trace.size() >= 2 && std::abs(trace.back() - trace[trace.size() - 2]) <=
                                              1e-8 * std::max(1.0, std::abs(trace.back()));
  return report;
}

}  // namespace

TrainReport train_surrogate(const Dataset& dataset, const RejectionParams& params,
                            const Rejector& initial, const TrainConfig& cfg) {
  auto report = gradient_descent(dataset, initial, cfg, [&params](double r, int a) {
    const bool saturated = std::abs(params.beta() * r) > losses::kExpClamp ||
                           std::abs(0.5 * params.alpha() * (r - a)) > losses::kExpClamp;
    return PointLoss{losses::surrogate_loss(r, a, params), losses::surrogate_grad(r, a, params),
                     saturated};
  });
  if (!params.constraint_satisfied()) {
    report.warnings.emplace_back(
        "2 beta c / alpha != i_bar: the surrogate minimizer's sign need not match the Bayes "
        "rejector");
  }
  return report;
}

TrainReport train_cross_entropy(const Dataset& dataset, const Rejector& initial,
                                const TrainConfig& cfg) {
  return gradient_descent(dataset, initial, cfg, [](double r, int a) {
    const double y = a == 1 ? 1.0 : 0.0;
    const double softplus = std::max(r, 0.0) + std::log1p(std::exp(-std::abs(r)));
    const double sigmoid = r >= 0.0 ? 1.0 / (1.0 + std::exp(-r)) : std::exp(r) / (1.0 + std::exp(r));
    return PointLoss{softplus - y * r, sigmoid - y, false};
  });
}

double surrogate_objective(const Rejector& rejector, const Dataset& dataset,
                           const RejectionParams& params) {
  long double total = 0.0L;
  for (const auto& e : dataset.examples()) {
    total += losses::surrogate_loss(rejector.evaluate(e.features), e.annotation, params);
  }
  return static_cast<double>(total / static_cast<long double>(dataset.size()));
}

std::vector<double> surrogate_objective_gradient(const Rejector& rejector, const Dataset& dataset,
                                                 const RejectionParams& params) {
  std::vector<double> grad(rejector.parameter_count(), 0.0);
  const double scale = 1.0 / static_cast<double>(dataset.size());
  for (const auto& e : dataset.examples()) {
    const double r = rejector.evaluate(e.features);
    rejector.accumulate_gradient(e.features, losses::surrogate_grad(r, e.annotation, params) * scale,
                                 grad);
  }
  return grad;
}

double grad_check(const Rejector& rejector, const Dataset& dataset, const RejectionParams& params,
                  double eps) {
  if (!(eps > 0.0)) throw ValidationError("finite-difference step must be positive");
  if (!rejector.trainable()) throw ValidationError("rejector variant is not trainable");
  const auto analytic = surrogate_objective_gradient(rejector, dataset, params);
  std::vector<double> theta(rejector.parameters().begin(), rejector.parameters().end());
  double worst = 0.0;
  for (std::size_t p = 0; p < theta.size(); ++p) {
    auto plus = theta;
    auto minus = theta;
    plus[p] += eps;
    minus[p] -= eps;
    const double f_plus = surrogate_objective(rejector.with_parameters(plus), dataset, params);
    const double f_minus = surrogate_objective(rejector.with_parameters(minus), dataset, params);
    const double numeric = (f_plus - f_minus) / (2.0 * eps);
    const double denom = std::max({std::abs(analytic[p]), std::abs(numeric), kGradCheckFloor});
    worst = std::max(worst, std::abs(analytic[p] - numeric) / denom);
  }
  return worst;
}

nlohmann::json report_to_json(const TrainReport& report) {
  nlohmann::json j;
  j["rejector"] = rejector_to_json(report.rejector);
  j["loss_trace"] = report.loss_trace;
  j["converged"] = report.converged;
  j["warnings"] = report.warnings;
  return j;
}

}  // namespace abstain

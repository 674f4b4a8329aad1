#include "abstain/theory.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "abstain/errors.hpp"
#include "abstain/losses.hpp"

namespace abstain::theory {

namespace {

void check_eta(double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw ValidationError("eta must lie in [0, 1], got " + std::to_string(eta));
  }
}

void check_cost(double c) {
  if (!(c > 0.0 && c < 1.0)) throw ValidationError("cost c must lie in (0, 1)");
}

double i_bar(double c, double alpha) {
  return c * std::exp(alpha / 2.0) + (1.0 - c) * std::exp(-alpha / 2.0);
}

}  // namespace

double i_eta(double eta, double alpha) {
  check_eta(eta);
  if (!(alpha > 0.0)) throw ValidationError("alpha must be positive");
  return eta * std::exp(-alpha / 2.0) + (1.0 - eta) * std::exp(alpha / 2.0);
}

double bayes_rejector(double eta, double c) {
  check_eta(eta);
  check_cost(c);
  return eta - (1.0 - c);
}

double conditional_rejection_risk(double r_value, double eta, double c) {
  check_eta(eta);
  check_cost(c);
  return r_value > 0.0 ? 1.0 - eta : c;
}

double min_conditional_rejection_risk(double eta, double c) {
  check_eta(eta);
  check_cost(c);
  return std::min(c, 1.0 - eta);
}

double conditional_surrogate_risk(double r_value, double eta, const RejectionParams& params) {
  const double i = i_eta(eta, params.alpha());
  return losses::clamped_exp(0.5 * params.alpha() * r_value) * i +
         params.c() * losses::clamped_exp(-params.beta() * r_value);
}

double min_conditional_surrogate_risk(double eta, const RejectionParams& params) {
  const double i = i_eta(eta, params.alpha());
  const double g = params.gamma();
  const double ratio = 2.0 * params.beta() * params.c() / params.alpha();
  return std::pow(ratio, g) * std::pow(i, 1.0 - g) / (1.0 - g);
}

double surrogate_minimizer(double eta, const RejectionParams& params) {
  const double i = i_eta(eta, params.alpha());
  const double ratio = 2.0 * params.beta() * params.c() / (params.alpha() * i);
  return 2.0 / (2.0 * params.beta() + params.alpha()) * std::log(ratio);
}

double calibration_gap_rejection(double r_value, double eta, double c) {
  const double r_star = bayes_rejector(eta, c);
  return r_value * r_star <= 0.0 ? std::abs(r_star) : 0.0;
}

double calibration_gap_surrogate(double r_value, double eta, const RejectionParams& params) {
  const double best = min_conditional_surrogate_risk(eta, params);
  const double gap = conditional_surrogate_risk(r_value, eta, params) - best;
  // Rounding at the minimizer can leave a tiny negative residue.
  if (gap < 0.0 && gap > -1e-12 * (1.0 + best)) return 0.0;
  return gap;
}

double psi(double u, double c, double alpha) {
  check_cost(c);
  const double ib = i_bar(c, alpha);
  const double spread = std::exp(alpha / 2.0) - std::exp(-alpha / 2.0);
  const double scaled = spread * u / ib;
  return 0.25 * (c * ib / (c + ib)) * scaled * scaled;
}

bool in_quadratic_bound_domain(double eta, double c, double alpha) {
  check_cost(c);
  return i_eta(eta, alpha) <= 2.0 * i_bar(c, alpha);
}

double psi_inverse(double z, double c, double alpha) {
  if (!(z >= 0.0)) throw ValidationError("psi_inverse needs z >= 0, got " + std::to_string(z));
  check_cost(c);
  if (!(alpha > 0.0)) throw ValidationError("alpha must be positive");
  const double ib = i_bar(c, alpha);
  const double spread = std::exp(alpha / 2.0) - std::exp(-alpha / 2.0);
  return 2.0 / spread * std::sqrt((c + ib) * ib / c * z);
}

double check_bernoulli(double x, double r) {
  if (!(x > 0.0 && x < 1.0) || !(r > 0.0 && r < 1.0)) {
    throw ValidationError("check_bernoulli needs x, r in (0, 1)");
  }
  // Both sides are 1 + O(x); subtract the 1 analytically.
  const double lhs_minus_one = std::expm1(r * std::log1p(x));
  const double rhs_minus_one = r * x + r * (r - 1.0) * x * x / 4.0;
  return rhs_minus_one - lhs_minus_one;
}

BoundReport verify_bound(double excess_l1, double excess_l2, double c, double alpha,
                         double tolerance) {
  if (excess_l1 < -tolerance || excess_l2 < -tolerance) {
    throw ValidationError("excess risks below -tolerance: estimator is inconsistent");
  }
  BoundReport report;
  report.excess_l1 = excess_l1;
  report.excess_l2 = excess_l2;
  report.bound_value = psi_inverse(std::max(excess_l1, 0.0), c, alpha);
  report.slack = report.bound_value - excess_l2;
  report.satisfied = excess_l2 <= report.bound_value + tolerance;
  return report;
}

}  // namespace abstain::theory

#include "abstain/losses.hpp"

#include <algorithm>
#include <cmath>

#include "abstain/errors.hpp"

namespace abstain::losses {

double clamped_exp(double x) noexcept { return std::exp(std::clamp(x, -kExpClamp, kExpClamp)); }

double rejection_loss(double r_value, int annotation, double c) {
  if (!(c > 0.0 && c < 1.0)) throw ValidationError("cost c must lie in (0, 1)");
  if (r_value <= 0.0) return c;
  return annotation == -1 ? 1.0 : 0.0;
}

double surrogate_loss(double r_value, int annotation, const RejectionParams& params) noexcept {
  const double a = static_cast<double>(annotation);
  return clamped_exp(0.5 * params.alpha() * (r_value - a)) +
         params.c() * clamped_exp(-params.beta() * r_value);
}

namespace {

// d/dx clamped_exp(k x) = k exp(k x) inside the clamp, 0 where it saturates.
double clamped_exp_slope(double k, double x) noexcept {
  const double arg = k * x;
  if (arg < -kExpClamp || arg > kExpClamp) return 0.0;
  return k * std::exp(arg);
}

}  // namespace

double surrogate_grad(double r_value, int annotation, const RejectionParams& params) noexcept {
  const double a = static_cast<double>(annotation);
  const double half_alpha = 0.5 * params.alpha();
  return clamped_exp_slope(half_alpha, r_value - a) +
         params.c() * clamped_exp_slope(-params.beta(), r_value);
}

}  // namespace abstain::losses

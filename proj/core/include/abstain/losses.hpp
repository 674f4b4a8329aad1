#pragma once

#include "abstain/core.hpp"

namespace abstain::losses {

/// Exponent arguments are clamped to this magnitude before exponentiation.
inline constexpr double kExpClamp = 500.0;

/// exp(clamp(x, -500, 500)).
double clamped_exp(double x) noexcept;

/// Induced rejection loss: c when rejecting (r <= 0), 1 for an accepted
/// error, 0 for an accepted correct prediction.
double rejection_loss(double r_value, int annotation, double c);

/// e^{(alpha/2)(r - a)} + c e^{-beta r}; an upper bound on rejection_loss.
double surrogate_loss(double r_value, int annotation, const RejectionParams& params) noexcept;

/// d surrogate_loss / d r (zero contribution from a term whose exponent is clamped).
double surrogate_grad(double r_value, int annotation, const RejectionParams& params) noexcept;

}  // namespace abstain::losses

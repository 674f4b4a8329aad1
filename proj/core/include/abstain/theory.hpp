#pragma once

#include "abstain/core.hpp"

// Closed-form conditional risks for the rejection loss and its exponential
// surrogate, as functions of eta = P(a = +1 | x). Everything here is exact
// (no sampling); the synthetic module integrates these over x.
namespace abstain::theory {

/// eta e^{-alpha/2} + (1 - eta) e^{alpha/2}; lies in [e^{-alpha/2}, e^{alpha/2}].
double i_eta(double eta, double alpha);

/// eta - (1 - c). Positive means accept.
double bayes_rejector(double eta, double c);

/// Expected rejection loss at value r: 1 - eta if accepted, c otherwise.
double conditional_rejection_risk(double r_value, double eta, double c);
/// min{c, 1 - eta}
double min_conditional_rejection_risk(double eta, double c);

/// e^{(alpha/2) r} I_eta + c e^{-beta r}
double conditional_surrogate_risk(double r_value, double eta, const RejectionParams& params);
/// (1/(1-gamma)) (2 beta c / alpha)^gamma I_eta^{1-gamma}
double min_conditional_surrogate_risk(double eta, const RejectionParams& params);

/// Unique minimizer of conditional_surrogate_risk:
/// (2 / (2 beta + alpha)) ln(2 beta c / (alpha I_eta)).
double surrogate_minimizer(double eta, const RejectionParams& params);

/// |eta - (1 - c)| when r and the Bayes rejector disagree (r r* <= 0), else 0.
double calibration_gap_rejection(double r_value, double eta, double c);

/// conditional_surrogate_risk(r) - min_conditional_surrogate_risk; >= 0.
double calibration_gap_surrogate(double r_value, double eta, const RejectionParams& params);

/// Quadratic lower bound on calibration_gap_surrogate(0, eta) in terms of
/// u = eta - (1 - c):  (1/4) (c Ibar / (c + Ibar)) ((e^{a/2} - e^{-a/2}) u / Ibar)^2.
/// Only guaranteed on the region where in_quadratic_bound_domain holds.
double psi(double u, double c, double alpha);

/// I_eta <= 2 Ibar, i.e. (I_eta - Ibar) / Ibar < 1, where the Bernoulli-type
/// inequality used to derive psi applies.
bool in_quadratic_bound_domain(double eta, double c, double alpha);

/// Inverse of psi: (2 / (e^{a/2} - e^{-a/2})) sqrt(((c + Ibar) Ibar / c) z).
/// Throws ValidationError for z < 0.
double psi_inverse(double z, double c, double alpha);

/// 1 + r x + r (r - 1) x^2 / 4 - (1 + x)^r for x, r in (0, 1). Non-negative.
double check_bernoulli(double x, double r);

struct BoundReport {
  double excess_l1 = 0;
  double excess_l2 = 0;
  double bound_value = 0;
  bool satisfied = false;
  double slack = 0;  // bound_value - excess_l2
};

/// Checks excess_l2 <= psi_inverse(max(excess_l1, 0)) + tolerance.
BoundReport verify_bound(double excess_l1, double excess_l2, double c, double alpha,
                         double tolerance);

}  // namespace abstain::theory

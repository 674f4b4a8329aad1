#include <doctest.h>

#include <cmath>
#include <random>

#include "abstain/errors.hpp"
#include "abstain/theory.hpp"

using namespace abstain;
using namespace abstain::theory;

namespace {

// Independent oracle: eta e^{(a/2)(r-1)} + (1-eta) e^{(a/2)(r+1)} + c e^{-beta r},
// minimized over a fixed grid.
struct GridMin {
  double argmin;
  double value;
};

GridMin brute_force(double eta, double c, double alpha, double beta, double step) {
  auto risk = [&](double r) {
    return eta * std::exp(0.5 * alpha * (r - 1)) + (1 - eta) * std::exp(0.5 * alpha * (r + 1)) +
           c * std::exp(-beta * r);
  };
  GridMin best{-2.0, risk(-2.0)};
  const long steps = std::lround(4.0 / step);
  for (long i = 1; i <= steps; ++i) {
    const double r = -2.0 + static_cast<double>(i) * step;
    const double v = risk(r);
    if (v < best.value) best = {r, v};
  }
  return best;
}

}  // namespace

TEST_CASE("i_eta and Bayes rejector") {
  CHECK(i_eta(0.5, 2.0) == doctest::Approx(1.543080634815243778478).epsilon(1e-14));
  CHECK(i_eta(1.0, 2.0) == doctest::Approx(std::exp(-1.0)));
  CHECK(i_eta(0.0, 2.0) == doctest::Approx(std::exp(1.0)));
  CHECK(bayes_rejector(0.99, 0.05) == doctest::Approx(0.04));
  CHECK(bayes_rejector(0.5, 0.05) == doctest::Approx(-0.45));
  CHECK_THROWS_AS(i_eta(1.5, 2.0), ValidationError);
}

TEST_CASE("conditional rejection risk") {
  CHECK(conditional_rejection_risk(1.0, 0.8, 0.05) == doctest::Approx(0.2));
  CHECK(conditional_rejection_risk(0.0, 0.8, 0.05) == doctest::Approx(0.05));
  CHECK(min_conditional_rejection_risk(0.8, 0.05) == doctest::Approx(0.05));
  CHECK(min_conditional_rejection_risk(0.99, 0.05) == doctest::Approx(0.01));
  // The minimum over the two achievable values, by enumeration.
  for (double eta = 0.0; eta <= 1.0; eta += 0.01) {
    const double enumerated = std::min(conditional_rejection_risk(1.0, eta, 0.1),
                                       conditional_rejection_risk(-1.0, eta, 0.1));
    CHECK(min_conditional_rejection_risk(eta, 0.1) == doctest::Approx(enumerated));
  }
}

TEST_CASE("surrogate minimizer matches grid minimization") {
  const auto p = make_params(0.05, 2.0);
  struct Case {
    double eta, r0, gap0;
  };
  for (const Case& k : {Case{0.8, -0.0509897581038655643, 0.009630747292184734619},
                        Case{0.99, 0.0201050388716376752, 0.000917239422609773874},
                        Case{0.5, -0.1080094014627700903, 0.06530575280296679167}}) {
    CAPTURE(k.eta);
    CHECK(surrogate_minimizer(k.eta, p) == doctest::Approx(k.r0).epsilon(1e-12));
    CHECK(calibration_gap_surrogate(0.0, k.eta, p) == doctest::Approx(k.gap0).epsilon(1e-10));
    const auto grid = brute_force(k.eta, p.c(), p.alpha(), p.beta(), 1e-5);
    CHECK(std::abs(grid.argmin - k.r0) <= 1e-4);
    CHECK(conditional_surrogate_risk(k.r0, k.eta, p) == doctest::Approx(grid.value).epsilon(1e-9));
    CHECK(min_conditional_surrogate_risk(k.eta, p) ==
          doctest::Approx(conditional_surrogate_risk(k.r0, k.eta, p)).epsilon(1e-12));
  }
  CHECK(surrogate_minimizer(0.99, p) > 0.0);
  CHECK(surrogate_minimizer(0.5, p) < 0.0);
}

TEST_CASE("sign of surrogate minimizer matches the Bayes rejector") {
  for (int i = 0; i <= 1000; i += 5) {
    const double eta = i / 1000.0;
    for (double c : {0.02, 0.05, 0.1, 0.2, 0.3}) {
      for (double alpha : {0.5, 1.0, 2.0, 4.0, 8.0}) {
        const auto p = make_params(c, alpha);
        const double r0 = surrogate_minimizer(eta, p);
        const double rs = bayes_rejector(eta, c);
        auto sign = [](double v) { return std::abs(v) < 1e-12 ? 0 : (v > 0 ? 1 : -1); };
        CAPTURE(eta);
        CAPTURE(c);
        CAPTURE(alpha);
        CHECK(sign(r0) == sign(rs));
      }
    }
  }
}

TEST_CASE("unconstrained beta can flip the sign") {
  // beta well above the constrained value pushes the minimizer towards acceptance.
  const auto p = make_params(0.05, 2.0, 50.0);
  CHECK(surrogate_minimizer(0.9, p) > 0.0);
  CHECK(bayes_rejector(0.9, 0.05) < 0.0);
}

TEST_CASE("calibration gaps") {
  const auto p = make_params(0.1, 2.0);
  CHECK(calibration_gap_rejection(0.3, 0.95, 0.1) == 0.0);
  CHECK(calibration_gap_rejection(-0.3, 0.95, 0.1) == doctest::Approx(0.05));
  CHECK(calibration_gap_rejection(0.0, 0.95, 0.1) == doctest::Approx(0.05));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ue(0.0, 1.0), ur(-3.0, 3.0);
  for (int i = 0; i < 2000; ++i) {
    const double eta = ue(rng);
    CHECK(calibration_gap_surrogate(ur(rng), eta, p) >= 0.0);
    CHECK(calibration_gap_surrogate(surrogate_minimizer(eta, p), eta, p) <= 1e-10);
  }
}

TEST_CASE("disagreement infimum is attained at r = 0") {
  for (double eta = 0.0; eta <= 1.0; eta += 0.02) {
    const auto p = make_params(0.05, 2.0);
    const double rs = bayes_rejector(eta, 0.05);
    const double at_zero = calibration_gap_surrogate(0.0, eta, p);
    // Over the disagreement region r * r* <= 0.
    for (double r = -2.0; r <= 2.0; r += 0.01) {
      if (r * rs > 0) continue;
      CHECK(calibration_gap_surrogate(r, eta, p) >= at_zero - 1e-12);
    }
  }
}

TEST_CASE("psi and its inverse") {
  CHECK(psi_inverse(0.01, 0.05, 2.0) == doctest::Approx(0.1939954162701832287).epsilon(1e-12));
  CHECK(psi_inverse(0.0, 0.05, 2.0) == 0.0);
  CHECK_THROWS_AS(psi_inverse(-1e-9, 0.05, 2.0), ValidationError);
  double previous = -1.0;
  for (double z = 0.0; z <= 1.0; z += 0.01) {
    const double v = psi_inverse(z, 0.1, 4.0);
    CHECK(v > previous);
    previous = v;
    CHECK(psi(v, 0.1, 4.0) == doctest::Approx(z).epsilon(1e-12));
  }
}

TEST_CASE("gap at zero dominates psi on the quadratic bound domain") {
  for (double c : {0.02, 0.05, 0.1, 0.2, 0.3}) {
    for (double alpha : {0.5, 1.0, 2.0, 4.0, 8.0}) {
      const auto p = make_params(c, alpha);
      for (double eta = 0.0; eta <= 1.0; eta += 0.001) {
        if (!in_quadratic_bound_domain(eta, c, alpha)) continue;
        const double u = bayes_rejector(eta, c);
        CHECK(calibration_gap_surrogate(0.0, eta, p) >= psi(u, c, alpha) - 1e-12);
      }
    }
  }
}

TEST_CASE("pointwise psi bound fails outside the quadratic bound domain") {
  // At eta = 0, I_eta = e^{alpha/2} is more than twice i_bar, and the
  // quadratic lower bound overshoots the true gap.
  const auto p = make_params(0.05, 2.0);
  REQUIRE_FALSE(in_quadratic_bound_domain(0.0, 0.05, 2.0));
  CHECK(calibration_gap_surrogate(0.0, 0.0, p) < psi(bayes_rejector(0.0, 0.05), 0.05, 2.0));
}

TEST_CASE("Bernoulli-type inequality") {
  CHECK(check_bernoulli(0.5, 0.5) == doctest::Approx(0.009630128608410950901).epsilon(1e-12));
  for (int i = 1; i < 1000; i += 7) {
    for (int j = 1; j < 1000; j += 7) {
      CHECK(check_bernoulli(i / 1000.0, j / 1000.0) >= -1e-12);
    }
  }
  CHECK_THROWS_AS(check_bernoulli(0.0, 0.5), ValidationError);
  CHECK_THROWS_AS(check_bernoulli(0.5, 1.0), ValidationError);
}

TEST_CASE("verify_bound") {
  const auto ok = verify_bound(0.01, 0.1, 0.05, 2.0, 0.0);
  CHECK(ok.satisfied);
  CHECK(ok.bound_value == doctest::Approx(0.1939954162701832287));
  CHECK(ok.slack == doctest::Approx(0.0939954162701832287));

  const auto bad = verify_bound(0.01, 0.3, 0.05, 2.0, 0.0);
  CHECK_FALSE(bad.satisfied);
  CHECK(bad.slack < 0.0);

  const auto zero = verify_bound(0.0, 0.0, 0.05, 2.0, 1e-12);
  CHECK(zero.satisfied);
  // A slightly negative Monte-Carlo estimate is clipped to zero.
  CHECK(verify_bound(-1e-4, 0.0, 0.05, 2.0, 1e-3).satisfied);
  CHECK_THROWS_AS(verify_bound(-1.0, 0.0, 0.05, 2.0, 1e-3), ValidationError);
}

#include "abstain/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <random>

#include "abstain/core.hpp"
#include "abstain/losses.hpp"
#include "abstain/models.hpp"
#include "abstain/synthetic.hpp"
#include "abstain/theory.hpp"
#include "abstain/train.hpp"

namespace abstain::verify {

namespace {

constexpr double kTol = 1e-12;
constexpr double kCostGrid[] = {0.02, 0.05, 0.1, 0.2, 0.3};
constexpr double kAlphaGrid[] = {0.5, 1.0, 2.0, 4.0, 8.0};

int sign_with_zero(double v) {
  if (std::abs(v) < kTol) return 0;
  return v > 0.0 ? 1 : -1;
}

class Tally {
 public:
  explicit Tally(std::string name) { result_.name = std::move(name); result_.worst = std::numeric_limits<double>::infinity(); }
  /// margin >= -tolerance passes.
  void record(double margin, double tolerance = kTol) {
    ++result_.cases;
    result_.worst = std::min(result_.worst, margin);
    if (!(margin >= -tolerance)) ++result_.violations;
  }
  PropertyResult finish() {
    result_.passed = result_.violations == 0 && result_.cases > 0;
    return result_;
  }

 private:
  PropertyResult result_;
};

std::size_t eta_steps(const VerifyOptions& o) { return o.quick ? 100 : 1000; }

}  // namespace

PropertyResult check_dominance(const VerifyOptions& options) {
  Tally t("surrogate_dominates_rejection");
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> r_law(-10.0, 10.0), c_law(0.01, 0.99), a_law(0.5, 8.0);
  std::bernoulli_distribution coin(0.5);
  const int draws = options.quick ? 10'000 : 100'000;
  for (int i = 0; i < draws; ++i) {
    const double r = r_law(rng);
    const int a = coin(rng) ? 1 : -1;
    const auto params = make_params(c_law(rng), a_law(rng));
    t.record(losses::surrogate_loss(r, a, params) - losses::rejection_loss(r, a, params.c()));
  }
  return t.finish();
}

PropertyResult check_sign_agreement(const VerifyOptions& options) {
  Tally t("minimizer_sign_matches_bayes");
  const auto steps = eta_steps(options);
  for (double c : kCostGrid) {
    for (double alpha : kAlphaGrid) {
      const auto params = make_params(c, alpha);
      for (std::size_t k = 0; k <= steps; ++k) {
        const double eta = static_cast<double>(k) / static_cast<double>(steps);
        const bool agree = sign_with_zero(theory::surrogate_minimizer(eta, params)) ==
                           sign_with_zero(theory::bayes_rejector(eta, c));
        t.record(agree ? 0.0 : -1.0, 0.0);
      }
    }
  }
  return t.finish();
}

PropertyResult check_bernoulli_grid(const VerifyOptions& options) {
  Tally t("bernoulli_type_inequality");
  const int steps = options.quick ? 100 : 1000;
  for (int i = 1; i < steps; ++i) {
    for (int j = 1; j < steps; ++j) {
      t.record(theory::check_bernoulli(static_cast<double>(i) / steps, static_cast<double>(j) / steps));
    }
  }
  return t.finish();
}

PropertyResult check_gap_minimum(const VerifyOptions& options) {
  // Margin: distance budget minus |grid argmin - r0|, and gap at r0 <= 1e-10.
  Tally t("surrogate_gap_vanishes_at_minimizer");
  std::mt19937_64 rng(options.seed + 1);
  std::uniform_real_distribution<double> eta_law(0.0, 1.0), c_law(0.01, 0.99), a_law(0.5, 8.0);
  const int draws = options.quick ? 50 : 200;
  const double step = options.quick ? 1e-3 : 1e-4;
  for (int i = 0; i < draws; ++i) {
    const double eta = eta_law(rng);
    const auto params = make_params(c_law(rng), a_law(rng));
    const double r0 = theory::surrogate_minimizer(eta, params);
    t.record(1e-10 - theory::calibration_gap_surrogate(r0, eta, params), 0.0);
    double best_r = -2.0;
    double best = std::numeric_limits<double>::infinity();
    const auto n = static_cast<int>(std::lround(4.0 / step));
    for (int k = 0; k <= n; ++k) {
      const double r = -2.0 + k * step;
      const double g = theory::calibration_gap_surrogate(r, eta, params);
      if (g < best) {
        best = g;
        best_r = r;
      }
    }
    t.record(step - std::abs(best_r - r0), 0.0);
    t.record(best);
  }
  return t.finish();
}

PropertyResult check_infimum_at_zero(const VerifyOptions& options) {
  Tally t("disagreement_infimum_at_zero");
  const auto steps = eta_steps(options);
  for (double c : kCostGrid) {
    for (double alpha : kAlphaGrid) {
      const auto params = make_params(c, alpha);
      for (std::size_t k = 0; k <= steps; ++k) {
        const double eta = static_cast<double>(k) / static_cast<double>(steps);
        const double r_star = theory::bayes_rejector(eta, c);
        if (sign_with_zero(r_star) == 0) continue;
        const double at_zero = theory::calibration_gap_surrogate(0.0, eta, params);
        // Disagreement half-line: r <= 0 when r* > 0, r >= 0 when r* < 0.
        const double dir = r_star > 0.0 ? -1.0 : 1.0;
        for (int s = 1; s <= 200; ++s) {
          const double r = dir * 0.01 * s;
          t.record(theory::calibration_gap_surrogate(r, eta, params) - at_zero);
        }
      }
    }
  }
  return t.finish();
}

PropertyResult check_psi_domination(const VerifyOptions& options) {
  Tally t("gap_at_zero_dominates_psi");
  const auto steps = eta_steps(options);
  for (double c : kCostGrid) {
    for (double alpha : kAlphaGrid) {
      const auto params = make_params(c, alpha);
      for (std::size_t k = 0; k <= steps; ++k) {
        const double eta = static_cast<double>(k) / static_cast<double>(steps);
        if (!theory::in_quadratic_bound_domain(eta, c, alpha)) continue;
        const double gap = theory::calibration_gap_surrogate(0.0, eta, params);
        t.record(gap - theory::psi(eta - (1.0 - c), c, alpha));
      }
    }
  }
  return t.finish();
}

PropertyResult check_bound_on_tasks(const VerifyOptions& options) {
  Tally t("consistency_bound_on_tasks");
  const std::size_t n_mc = options.quick ? 10'000 : 100'000;
  const int random_rejectors = options.quick ? 20 : 200;
  std::uint64_t stream = options.seed;
  for (const auto& task : synthetic::default_tasks()) {
    for (double c : options.costs) {
      const auto params = make_params(c, options.alpha);
      const std::size_t dim = task.x_law.dim;
      std::vector<synthetic::RejectorFn> rejectors;
      std::mt19937_64 rng(++stream);
      std::uniform_real_distribution<double> u(-2.0, 2.0);
      for (int i = 0; i < random_rejectors; ++i) {
        std::vector<double> w(dim);
        for (auto& v : w) v = u(rng);
        rejectors.push_back(synthetic::as_function(Rejector::linear(w, u(rng))));
      }
      rejectors.push_back(synthetic::bayes_rejector_fn(task, c));
      const auto data = synthetic::sample(task, options.quick ? 500 : 2000, stream);
      TrainConfig cfg;
      cfg.learning_rate = 0.01;
      cfg.epochs = options.quick ? 50 : 200;
      cfg.seed = stream;
      const auto trained =
          train_surrogate(data, params, init_rejector({RejectorKind::kLinear}, dim, stream), cfg);
      rejectors.push_back(synthetic::as_function(trained.rejector));

      for (const auto& r : rejectors) {
        const auto ex = synthetic::excess_risks(r, task, params, n_mc, stream);
        const double tol = 3.0 * std::hypot(ex.rejection.se, ex.surrogate.se);
        const auto report =
            theory::verify_bound(ex.surrogate.mean, ex.rejection.mean, c, options.alpha, tol);
        t.record(report.slack, tol);
      }
    }
  }
  return t.finish();
}

std::vector<PropertyResult> run_property_suite(const VerifyOptions& options) {
  return {check_dominance(options),      check_sign_agreement(options),
          check_bernoulli_grid(options), check_gap_minimum(options),
          check_infimum_at_zero(options), check_psi_domination(options),
          check_bound_on_tasks(options)};
}

void write_property_csv(std::ostream& out, const std::vector<PropertyResult>& results) {
  out << "property,cases,violations,worst,status\n";
  for (const auto& r : results) {
    char worst[64];
    std::snprintf(worst, sizeof worst, "%.6g", r.worst);
    out << r.name << ',' << r.cases << ',' << r.violations << ',' << worst << ','
        << (r.passed ? "pass" : "fail") << '\n';
  }
}

}  // namespace abstain::verify

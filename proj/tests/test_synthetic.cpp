#include <doctest.h>

#include <cmath>
#include <random>

#include "abstain/errors.hpp"
#include "abstain/synthetic.hpp"
#include "abstain/theory.hpp"

using namespace abstain;
using namespace abstain::synthetic;

namespace {

SyntheticTask constant_task(double eta) { return default_task("constant:" + std::to_string(eta)); }

}  // namespace

TEST_CASE("default tasks") {
  const auto tasks = default_tasks();
  CHECK(tasks.size() == 7);
  for (const auto& t : tasks) CHECK_NOTHROW(validate(t));
  CHECK(positive_rate(default_task("piecewise")) == doctest::Approx(0.89).epsilon(1e-12));
  CHECK(positive_rate(default_task("logistic")) == doctest::Approx(0.5).epsilon(2e-3));
  CHECK(positive_rate(default_task("constant:0.8")) == 0.8);
  CHECK(default_task("constant:0.3").eta == 0.3);
  CHECK_THROWS_AS(default_task("nonsense"), ValidationError);
  CHECK_THROWS_AS(default_task("constant:1.5"), ValidationError);
}

TEST_CASE("piecewise eta levels by region") {
  const auto t = default_task("piecewise");
  const double cut = t.breakpoints[0];
  CHECK(eta_at(t, std::vector<double>{cut - 1e-9, 0.0}) == 0.6);
  CHECK(eta_at(t, std::vector<double>{cut, 0.0}) == 0.98);
  CHECK(eta_at(t, std::vector<double>{0.9, -0.9}) == 0.98);
}

TEST_CASE("validate rejects inconsistent tasks") {
  auto t = default_task("piecewise");
  t.levels = {0.5};
  CHECK_THROWS_AS(validate(t), ValidationError);
  t = default_task("logistic");
  t.weights = {1.0, 2.0};
  CHECK_THROWS_AS(validate(t), ValidationError);
  t = constant_task(0.5);
  t.score_noise = -0.1;
  CHECK_THROWS_AS(validate(t), ValidationError);
  t = constant_task(0.5);
  t.x_law.low = 1.0;
  CHECK_THROWS_AS(validate(t), ValidationError);
}

TEST_CASE("sampling") {
  const auto ones = sample(constant_task(1.0), 500, 3);
  CHECK(ones.positive_rate() == 1.0);

  const std::size_t n = 100000;
  const auto ds = sample(constant_task(0.8), n, 4);
  const double se = std::sqrt(0.8 * 0.2 / n);
  CHECK(std::abs(ds.positive_rate() - 0.8) <= 3 * se);

  const auto a = sample(default_task("piecewise"), 300, 9);
  const auto b = sample(default_task("piecewise"), 300, 9);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].features == b[i].features);
    CHECK(a[i].annotation == b[i].annotation);
  }
  CHECK(a.dim() == 2);
  CHECK_FALSE(a.has_scores());
}

TEST_CASE("score noise stays within its amplitude") {
  auto t = default_task("piecewise");
  t.score_noise = 0.3;
  const auto ds = sample(t, 2000, 1);
  REQUIRE(ds.has_scores());
  for (const auto& e : ds.examples()) {
    CHECK(std::abs(*e.score - eta_at(t, e.features)) <= 0.3);
  }
}

TEST_CASE("exact-rate sampling") {
  const auto ds = sample_exact_rate(constant_task(0.89), 1000, 2);
  CHECK(ds.positive_rate() == doctest::Approx(0.89).epsilon(1e-15));
  CHECK_THROWS_AS(sample_exact_rate(default_task("logistic"), 100, 1), ValidationError);
}

TEST_CASE("Bayes risks on constant tasks are exact") {
  const auto p = make_params(0.05, 2.0);
  const auto r = bayes_risks(constant_task(0.8), p, 1000, 0);
  CHECK(r.rejection.mean == doctest::Approx(0.05));
  CHECK(r.rejection.se == 0.0);
  CHECK(r.surrogate.mean ==
        doctest::Approx(theory::min_conditional_surrogate_risk(0.8, p)).epsilon(1e-14));
  const auto edge = bayes_risks(constant_task(0.95), p, 1000, 0);
  CHECK(edge.rejection.mean == doctest::Approx(0.05));
  CHECK_THROWS_AS(bayes_risks(constant_task(0.8), p, 999, 0), ValidationError);
}

TEST_CASE("risk of fixed rejectors") {
  const auto p = make_params(0.05, 2.0);
  const auto t = default_task("logistic");
  const auto always_reject = risk_of(Rejector::constant(-1.0), t, LossKind::kRejection, p, 1000, 1);
  CHECK(always_reject.mean == doctest::Approx(0.05));
  CHECK(always_reject.se < 1e-15);

  const auto always_accept =
      risk_of(Rejector::constant(1.0), constant_task(0.8), LossKind::kRejection, p, 1000, 1);
  CHECK(always_accept.mean == doctest::Approx(0.2));

  CHECK_THROWS_AS(risk_of(Rejector::linear({1.0, 1.0}, 0.0), t, LossKind::kRejection, p, 1000, 1),
                  ValidationError);
  CHECK_THROWS_AS(risk_of(Rejector::score_offset(0.5), t, LossKind::kRejection, p, 1000, 1),
                  ValidationError);
}

TEST_CASE("Bayes rejector attains the Bayes rejection risk") {
  const auto p = make_params(0.1, 2.0);
  for (const char* name : {"logistic", "piecewise"}) {
    const auto t = default_task(name);
    const auto bayes = bayes_risks(t, p, 20000, 5);
    const auto via_rejector =
        risk_of(bayes_rejector_fn(t, 0.1), t, LossKind::kRejection, p, 20000, 5);
    // Same seed, same x draws: the estimates coincide.
    CHECK(via_rejector.mean == doctest::Approx(bayes.rejection.mean).epsilon(1e-12));
  }
}

TEST_CASE("Monte-Carlo estimates agree across sample sizes") {
  const auto p = make_params(0.05, 2.0);
  const auto t = default_task("logistic");
  const auto rj = Rejector::linear({1.5}, -0.2);
  const auto small = risk_of(rj, t, LossKind::kSurrogate, p, 10000, 1);
  const auto large = risk_of(rj, t, LossKind::kSurrogate, p, 1000000, 2);
  CHECK(std::abs(small.mean - large.mean) <= 3 * std::hypot(small.se, large.se));
}

TEST_CASE("excess risks and the consistency bound on random linear rejectors") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (double c : {0.05, 0.1}) {
    const auto p = make_params(c, 2.0);
    for (const char* name : {"logistic", "piecewise", "constant:0.5"}) {
      const auto t = default_task(name);
      for (int i = 0; i < 20; ++i) {
        std::vector<double> w(t.x_law.dim);
        for (auto& v : w) v = u(rng);
        const auto rj = Rejector::linear(w, u(rng));
        const auto ex = excess_risks(as_function(rj), t, p, 10000, static_cast<std::uint64_t>(i));
        const double tol = 3 * std::hypot(ex.rejection.se, ex.surrogate.se);
        CHECK(ex.rejection.mean >= -tol);
        CHECK(ex.surrogate.mean >= -tol);
        CHECK(theory::verify_bound(ex.surrogate.mean, ex.rejection.mean, c, 2.0, tol).satisfied);
      }
    }
  }
}

TEST_CASE("surrogate risk bounds rejection risk for the same rejector") {
  const auto p = make_params(0.05, 2.0);
  const auto t = default_task("piecewise");
  const auto rj = Rejector::linear({0.7, -0.1}, 0.05);
  const auto l2 = risk_of(rj, t, LossKind::kRejection, p, 10000, 3);
  const auto l1 = risk_of(rj, t, LossKind::kSurrogate, p, 10000, 3);
  CHECK(l1.mean >= l2.mean);
}

TEST_CASE("task JSON round trip and parse_task") {
  for (const auto& t : default_tasks()) {
    const auto back = task_from_json(nlohmann::json::parse(task_to_json(t).dump()));
    CHECK(back.name == t.name);
    CHECK(task_to_json(back) == task_to_json(t));
  }
  const auto inline_task =
      parse_task(R"({"name":"mine","kind":"constant-eta","eta":0.7,"x_law":{"dim":3}})");
  CHECK(inline_task.eta == 0.7);
  CHECK(inline_task.x_law.dim == 3);
  CHECK(parse_task("logistic").kind == TaskKind::kLogistic);
  CHECK_THROWS_AS(parse_task("{not json"), ValidationError);
}

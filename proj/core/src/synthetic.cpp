#include "abstain/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include "abstain/errors.hpp"
#include "abstain/losses.hpp"
#include "abstain/theory.hpp"

namespace abstain::synthetic {

namespace {

class MeanAccumulator {
 public:
  void add(double x) {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }
  Estimate finish() const {
    Estimate e;
    e.mean = mean_;
    if (n_ > 1) e.se = std::sqrt(m2_ / static_cast<double>(n_ - 1) / static_cast<double>(n_));
    return e;
  }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

class FeatureSampler {
 public:
  FeatureSampler(const FeatureLaw& law, std::uint64_t seed)
      : law_(law), rng_(seed), uniform_(law.low, law.high) {}

  std::mt19937_64& rng() { return rng_; }

  void draw(std::vector<double>& x) {
    x.resize(law_.dim);
    for (auto& v : x) {
      v = law_.kind == FeatureLaw::Kind::kUniformBox ? uniform_(rng_) : normal_(rng_);
    }
  }

 private:
  FeatureLaw law_;
  std::mt19937_64 rng_;
  std::uniform_real_distribution<double> uniform_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

double normal_cdf(double t) { return 0.5 * std::erfc(-t / std::sqrt(2.0)); }

double law_cdf(const FeatureLaw& law, double t) {
  if (law.kind == FeatureLaw::Kind::kStandardNormal) return normal_cdf(t);
  return std::clamp((t - law.low) / (law.high - law.low), 0.0, 1.0);
}

void check_n_mc(std::size_t n_mc) {
  if (n_mc < 1000) throw ValidationError("Monte-Carlo sample count must be >= 1000");
}

void check_rejector_dim(const Rejector& rejector, const SyntheticTask& task) {
  if (rejector.kind() == RejectorKind::kScoreOffset) {
    throw ValidationError("score_offset rejectors cannot be evaluated on synthetic features");
  }
  if (rejector.dim() != 0 && rejector.dim() != task.x_law.dim) {
    throw ValidationError("rejector dim " + std::to_string(rejector.dim()) +
                          " does not match task dim " + std::to_string(task.x_law.dim));
  }
}

double conditional_loss(double r, double eta, LossKind loss, const RejectionParams& params) {
  if (loss == LossKind::kRejection) {
    return eta * losses::rejection_loss(r, 1, params.c()) +
           (1.0 - eta) * losses::rejection_loss(r, -1, params.c());
  }
  return eta * losses::surrogate_loss(r, 1, params) +
         (1.0 - eta) * losses::surrogate_loss(r, -1, params);
}

std::string kind_name(TaskKind kind) {
  switch (kind) {
    case TaskKind::kConstantEta: return "constant-eta";
    case TaskKind::kLogistic: return "logistic";
    case TaskKind::kPiecewise: return "piecewise";
  }
  return "unknown";
}

}  // namespace

void validate(const SyntheticTask& task) {
  const auto& law = task.x_law;
  if (law.dim == 0) throw ValidationError("task feature dim must be >= 1");
  if (law.kind == FeatureLaw::Kind::kUniformBox &&
      !(std::isfinite(law.low) && std::isfinite(law.high) && law.low < law.high)) {
    throw ValidationError("uniform box needs finite low < high");
  }
  if (!(task.c > 0.0 && task.c < 1.0)) throw ValidationError("task cost c must lie in (0, 1)");
  if (task.score_noise && !(*task.score_noise >= 0.0 && std::isfinite(*task.score_noise))) {
    throw ValidationError("score noise must be finite and >= 0");
  }
  switch (task.kind) {
    case TaskKind::kConstantEta:
      if (!(task.eta >= 0.0 && task.eta <= 1.0)) throw ValidationError("eta must lie in [0, 1]");
      break;
    case TaskKind::kLogistic:
      if (task.weights.size() != law.dim) {
        throw ValidationError("logistic weights must have length dim");
      }
      for (double w : task.weights) {
        if (!std::isfinite(w)) throw ValidationError("logistic weights must be finite");
      }
      if (!std::isfinite(task.bias)) throw ValidationError("logistic bias must be finite");
      break;
    case TaskKind::kPiecewise:
      if (task.levels.size() != task.breakpoints.size() + 1) {
        throw ValidationError("piecewise task needs one more level than breakpoints");
      }
      if (!std::is_sorted(task.breakpoints.begin(), task.breakpoints.end())) {
        throw ValidationError("piecewise breakpoints must be sorted");
      }
      for (double b : task.breakpoints) {
        if (!std::isfinite(b)) throw ValidationError("piecewise breakpoints must be finite");
      }
      for (double l : task.levels) {
        if (!(l >= 0.0 && l <= 1.0)) throw ValidationError("piecewise levels must lie in [0, 1]");
      }
      break;
  }
}

double eta_at(const SyntheticTask& task, std::span<const double> x) {
  switch (task.kind) {
    case TaskKind::kConstantEta: return task.eta;
    case TaskKind::kLogistic: {
      double z = task.bias;
      for (std::size_t k = 0; k < task.weights.size(); ++k) z += task.weights[k] * x[k];
      return 1.0 / (1.0 + std::exp(-z));
    }
    case TaskKind::kPiecewise: {
      const auto it = std::upper_bound(task.breakpoints.begin(), task.breakpoints.end(), x[0]);
      return task.levels[static_cast<std::size_t>(it - task.breakpoints.begin())];
    }
  }
  return 0.0;
}

double positive_rate(const SyntheticTask& task) {
  validate(task);
  switch (task.kind) {
    case TaskKind::kConstantEta: return task.eta;
    case TaskKind::kPiecewise: {
      double rate = 0.0;
      double lower = 0.0;
      for (std::size_t i = 0; i < task.levels.size(); ++i) {
        const double upper =
            i < task.breakpoints.size() ? law_cdf(task.x_law, task.breakpoints[i]) : 1.0;
        rate += task.levels[i] * (upper - lower);
        lower = upper;
      }
      return rate;
    }
    case TaskKind::kLogistic: {
      FeatureSampler sampler(task.x_law, 0);
      MeanAccumulator acc;
      std::vector<double> x;
      for (int i = 0; i < 1'000'000; ++i) {
        sampler.draw(x);
        acc.add(eta_at(task, x));
      }
      return acc.finish().mean;
    }
  }
  return 0.0;
}

Dataset sample(const SyntheticTask& task, std::size_t n, std::uint64_t seed) {
  validate(task);
  if (n == 0) throw ValidationError("sample size must be >= 1");
  FeatureSampler sampler(task.x_law, seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Example> records;
  records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Example e;
    sampler.draw(e.features);
    const double eta = eta_at(task, e.features);
    e.annotation = unit(sampler.rng()) < eta ? 1 : -1;
    if (task.score_noise) {
      const double noise = *task.score_noise;
      e.score = eta + (2.0 * unit(sampler.rng()) - 1.0) * noise;
    }
    records.push_back(std::move(e));
  }
  return make_dataset(std::move(records));
}

Dataset sample_exact_rate(const SyntheticTask& task, std::size_t n, std::uint64_t seed) {
  validate(task);
  if (task.kind != TaskKind::kConstantEta) {
    throw ValidationError("exact-rate sampling is defined for constant-eta tasks only");
  }
  if (n == 0) throw ValidationError("sample size must be >= 1");
  FeatureSampler sampler(task.x_law, seed);
  const auto positives = static_cast<std::size_t>(std::llround(task.eta * static_cast<double>(n)));
  std::vector<int> labels(n, -1);
  std::fill_n(labels.begin(), positives, 1);
  std::shuffle(labels.begin(), labels.end(), sampler.rng());
  std::vector<Example> records(n);
  for (std::size_t i = 0; i < n; ++i) {
    sampler.draw(records[i].features);
    records[i].annotation = labels[i];
  }
  return make_dataset(std::move(records));
}

RejectorFn bayes_rejector_fn(const SyntheticTask& task, double c) {
  return [task, c](std::span<const double> x) {
    return theory::bayes_rejector(eta_at(task, x), c);
  };
}

RejectorFn as_function(const Rejector& rejector) {
  return [rejector](std::span<const double> x) { return rejector.evaluate(x); };
}

RiskPair bayes_risks(const SyntheticTask& task, const RejectionParams& params, std::size_t n_mc,
                     std::uint64_t seed) {
  validate(task);
  check_n_mc(n_mc);
  FeatureSampler sampler(task.x_law, seed);
  MeanAccumulator l2;
  MeanAccumulator l1;
  std::vector<double> x;
  for (std::size_t i = 0; i < n_mc; ++i) {
    sampler.draw(x);
    const double eta = eta_at(task, x);
    l2.add(theory::min_conditional_rejection_risk(eta, params.c()));
    l1.add(theory::min_conditional_surrogate_risk(eta, params));
  }
  return {l2.finish(), l1.finish()};
}

Estimate risk_of(const Rejector& rejector, const SyntheticTask& task, LossKind loss,
                 const RejectionParams& params, std::size_t n_mc, std::uint64_t seed) {
  check_rejector_dim(rejector, task);
  return risk_of(as_function(rejector), task, loss, params, n_mc, seed);
}

Estimate risk_of(const RejectorFn& rejector, const SyntheticTask& task, LossKind loss,
                 const RejectionParams& params, std::size_t n_mc, std::uint64_t seed) {
  validate(task);
  check_n_mc(n_mc);
  FeatureSampler sampler(task.x_law, seed);
  MeanAccumulator acc;
  std::vector<double> x;
  for (std::size_t i = 0; i < n_mc; ++i) {
    sampler.draw(x);
    acc.add(conditional_loss(rejector(x), eta_at(task, x), loss, params));
  }
  return acc.finish();
}

RiskPair excess_risks(const RejectorFn& rejector, const SyntheticTask& task,
                      const RejectionParams& params, std::size_t n_mc, std::uint64_t seed) {
  validate(task);
  check_n_mc(n_mc);
  FeatureSampler sampler(task.x_law, seed);
  MeanAccumulator l2;
  MeanAccumulator l1;
  std::vector<double> x;
  for (std::size_t i = 0; i < n_mc; ++i) {
    sampler.draw(x);
    const double eta = eta_at(task, x);
    const double r = rejector(x);
    l2.add(conditional_loss(r, eta, LossKind::kRejection, params) -
           theory::min_conditional_rejection_risk(eta, params.c()));
    l1.add(conditional_loss(r, eta, LossKind::kSurrogate, params) -
           theory::min_conditional_surrogate_risk(eta, params));
  }
  return {l2.finish(), l1.finish()};
}

std::vector<SyntheticTask> default_tasks() {
  std::vector<SyntheticTask> tasks;
  for (double eta : {0.5, 0.8, 0.89, 0.95, 0.99}) {
    SyntheticTask t;
    t.kind = TaskKind::kConstantEta;
    t.eta = eta;
    t.name = "constant:" + nlohmann::json(eta).dump();
    tasks.push_back(t);
  }
  SyntheticTask logistic;
  logistic.name = "logistic";
  logistic.kind = TaskKind::kLogistic;
  logistic.weights = {4.0};
  logistic.bias = 0.0;
  tasks.push_back(logistic);

  // Low level on x_0 < t with mass 0.09 / 0.38 gives positive rate 0.89.
  SyntheticTask piecewise;
  piecewise.name = "piecewise";
  piecewise.kind = TaskKind::kPiecewise;
  piecewise.x_law.dim = 2;
  piecewise.levels = {0.6, 0.98};
  piecewise.breakpoints = {-1.0 + 2.0 * (0.09 / 0.38)};
  tasks.push_back(piecewise);
  return tasks;
}

SyntheticTask default_task(const std::string& name) {
  for (auto& t : default_tasks()) {
    if (t.name == name) return t;
  }
  constexpr std::string_view prefix = "constant:";
  if (name.starts_with(prefix)) {
    SyntheticTask t;
    t.name = name;
    try {
      t.eta = std::stod(name.substr(prefix.size()));
    } catch (const std::exception&) {
      throw ValidationError("cannot parse eta in task '" + name + "'");
    }
    validate(t);
    return t;
  }
  throw ValidationError("unknown task '" + name + "'");
}

nlohmann::json task_to_json(const SyntheticTask& task) {
  nlohmann::json j;
  j["name"] = task.name;
  j["kind"] = kind_name(task.kind);
  switch (task.kind) {
    case TaskKind::kConstantEta: j["eta"] = task.eta; break;
    case TaskKind::kLogistic:
      j["weights"] = task.weights;
      j["bias"] = task.bias;
      break;
    case TaskKind::kPiecewise:
      j["breakpoints"] = task.breakpoints;
      j["levels"] = task.levels;
      break;
  }
  nlohmann::json law;
  law["kind"] = task.x_law.kind == FeatureLaw::Kind::kUniformBox ? "uniform" : "normal";
  law["dim"] = task.x_law.dim;
  if (task.x_law.kind == FeatureLaw::Kind::kUniformBox) {
    law["low"] = task.x_law.low;
    law["high"] = task.x_law.high;
  }
  j["x_law"] = law;
  j["c"] = task.c;
  if (task.score_noise) j["score_noise"] = *task.score_noise;
  return j;
}

SyntheticTask task_from_json(const nlohmann::json& j) {
  SyntheticTask t;
  try {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "constant-eta") {
      t.kind = TaskKind::kConstantEta;
      t.eta = j.at("eta").get<double>();
    } else if (kind == "logistic") {
      t.kind = TaskKind::kLogistic;
      t.weights = j.at("weights").get<std::vector<double>>();
      t.bias = j.value("bias", 0.0);
    } else if (kind == "piecewise") {
      t.kind = TaskKind::kPiecewise;
      t.breakpoints = j.at("breakpoints").get<std::vector<double>>();
      t.levels = j.at("levels").get<std::vector<double>>();
    } else {
      throw ValidationError("unknown task kind '" + kind + "'");
    }
    t.name = j.value("name", kind);
    if (auto law = j.find("x_law"); law != j.end()) {
      const auto law_kind = law->value("kind", std::string("uniform"));
      if (law_kind == "uniform") {
        t.x_law.kind = FeatureLaw::Kind::kUniformBox;
      } else if (law_kind == "normal") {
        t.x_law.kind = FeatureLaw::Kind::kStandardNormal;
      } else {
        throw ValidationError("unknown feature law '" + law_kind + "'");
      }
      t.x_law.dim = law->value("dim", std::size_t{1});
      t.x_law.low = law->value("low", -1.0);
      t.x_law.high = law->value("high", 1.0);
    } else if (t.kind == TaskKind::kLogistic) {
      t.x_law.dim = t.weights.size();
    }
    t.c = j.value("c", 0.05);
    if (auto s = j.find("score_noise"); s != j.end() && !s->is_null()) {
      t.score_noise = s->get<double>();
    }
  } catch (const nlohmann::json::exception& err) {
    throw ValidationError(std::string("malformed task JSON: ") + err.what());
  }
  validate(t);
  return t;
}

SyntheticTask parse_task(const std::string& spec) {
  const auto first = spec.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && spec[first] == '{') {
    try {
      return task_from_json(nlohmann::json::parse(spec));
    } catch (const nlohmann::json::parse_error& err) {
      throw ValidationError(std::string("malformed task JSON: ") + err.what());
    }
  }
  if (spec.ends_with(".json")) {
    std::ifstream in(spec);
    if (!in) throw IoError("cannot open task file " + spec);
    try {
      return task_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& err) {
      throw ValidationError(std::string("malformed task JSON: ") + err.what());
    }
  }
  return default_task(spec);
}

}  // namespace abstain::synthetic

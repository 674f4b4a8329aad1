#include "abstain/models.hpp"

#include <cmath>
#include <random>

#include "abstain/errors.hpp"

namespace abstain {

std::string_view to_string(RejectorKind kind) {
  switch (kind) {
    case RejectorKind::kConstant: return "constant";
    case RejectorKind::kLinear: return "linear";
    case RejectorKind::kMlp1: return "mlp1";
    case RejectorKind::kScoreOffset: return "score_offset";
  }
  return "unknown";
}

RejectorKind parse_rejector_kind(std::string_view name) {
  if (name == "constant") return RejectorKind::kConstant;
  if (name == "linear") return RejectorKind::kLinear;
  if (name == "mlp1") return RejectorKind::kMlp1;
  if (name == "score_offset") return RejectorKind::kScoreOffset;
  throw ValidationError("unknown rejector variant '" + std::string(name) + "'");
}

namespace {

std::size_t expected_count(RejectorKind kind, std::size_t dim, std::size_t hidden) {
  switch (kind) {
    case RejectorKind::kConstant:
    case RejectorKind::kScoreOffset: return 1;
    case RejectorKind::kLinear: return dim + 1;
    case RejectorKind::kMlp1: return hidden * dim + 2 * hidden + 1;
  }
  return 0;
}

}  // namespace

Rejector::Rejector(RejectorKind kind, std::size_t dim, std::size_t hidden,
                   std::vector<double> params)
    : kind_(kind), dim_(dim), hidden_(hidden), params_(std::move(params)) {
  if ((kind_ == RejectorKind::kLinear || kind_ == RejectorKind::kMlp1) && dim_ == 0) {
    throw ValidationError(std::string(to_string(kind_)) + " rejector needs dim >= 1");
  }
  if (kind_ == RejectorKind::kMlp1 && hidden_ == 0) {
    throw ValidationError("mlp1 hidden width must be >= 1");
  }
  if (params_.size() != expected_count(kind_, dim_, hidden_)) {
    throw ValidationError(std::string(to_string(kind_)) + " rejector expects " +
                          std::to_string(expected_count(kind_, dim_, hidden_)) +
                          " parameters, got " + std::to_string(params_.size()));
  }
  for (double p : params_) {
    if (!std::isfinite(p)) throw ValidationError("rejector parameters must be finite");
  }
}

Rejector Rejector::constant(double bias) { return {RejectorKind::kConstant, 0, 0, {bias}}; }

Rejector Rejector::linear(std::vector<double> weights, double bias) {
  const auto dim = weights.size();
  weights.push_back(bias);
  return {RejectorKind::kLinear, dim, 0, std::move(weights)};
}

Rejector Rejector::mlp1(std::size_t dim, std::size_t hidden, std::vector<double> parameters) {
  return {RejectorKind::kMlp1, dim, hidden, std::move(parameters)};
}

Rejector Rejector::score_offset(double offset) {
  return {RejectorKind::kScoreOffset, 0, 0, {offset}};
}

Rejector Rejector::from_parameters(RejectorKind kind, std::size_t dim, std::size_t hidden,
                                   std::vector<double> parameters) {
  if (kind != RejectorKind::kLinear && kind != RejectorKind::kMlp1) dim = 0;
  if (kind != RejectorKind::kMlp1) hidden = 0;
  return {kind, dim, hidden, std::move(parameters)};
}

Rejector Rejector::with_parameters(std::vector<double> parameters) const {
  return {kind_, dim_, hidden_, std::move(parameters)};
}

double Rejector::evaluate(std::span<const double> x) const {
  if (dim_ != 0 && x.size() != dim_) {
    throw ValidationError("rejector expects dim " + std::to_string(dim_) + ", got " +
                          std::to_string(x.size()));
  }
  switch (kind_) {
    case RejectorKind::kConstant: return params_[0];
    case RejectorKind::kLinear: {
      double r = params_[dim_];
      for (std::size_t k = 0; k < dim_; ++k) r += params_[k] * x[k];
      return r;
    }
    case RejectorKind::kMlp1: {
      const double* w = params_.data();
      const double* hb = w + hidden_ * dim_;
      const double* v = hb + hidden_;
      double r = v[hidden_];
      for (std::size_t j = 0; j < hidden_; ++j) {
        double z = hb[j];
        for (std::size_t k = 0; k < dim_; ++k) z += w[j * dim_ + k] * x[k];
        r += v[j] * std::tanh(z);
      }
      return r;
    }
    case RejectorKind::kScoreOffset:
      throw ValidationError("score_offset rejector reads the example score, not features");
  }
  return 0.0;
}

void Rejector::accumulate_gradient(std::span<const double> x, double upstream,
                                   std::span<double> out) const {
  if (!trainable()) throw ValidationError("score_offset rejector has no trainable parameters");
  if (dim_ != 0 && x.size() != dim_) throw ValidationError("dimension mismatch");
  switch (kind_) {
    case RejectorKind::kConstant: out[0] += upstream; return;
    case RejectorKind::kLinear:
      for (std::size_t k = 0; k < dim_; ++k) out[k] += upstream * x[k];
      out[dim_] += upstream;
      return;
    case RejectorKind::kMlp1: {
      const double* w = params_.data();
      const double* hb = w + hidden_ * dim_;
      const double* v = hb + hidden_;
      double* gw = out.data();
      double* ghb = gw + hidden_ * dim_;
      double* gv = ghb + hidden_;
      for (std::size_t j = 0; j < hidden_; ++j) {
        double z = hb[j];
        for (std::size_t k = 0; k < dim_; ++k) z += w[j * dim_ + k] * x[k];
        const double h = std::tanh(z);
        gv[j] += upstream * h;
        const double back = upstream * v[j] * (1.0 - h * h);
        ghb[j] += back;
        for (std::size_t k = 0; k < dim_; ++k) gw[j * dim_ + k] += back * x[k];
      }
      gv[hidden_] += upstream;
      return;
    }
    case RejectorKind::kScoreOffset: return;
  }
}

double predict(const Rejector& rejector, const Example& example) {
  if (rejector.kind() == RejectorKind::kScoreOffset) {
    if (!example.score) throw ValidationError("score_offset rejector needs an example score");
    return *example.score - rejector.parameters()[0];
  }
  return rejector.evaluate(example.features);
}

std::vector<double> param_grad(const Rejector& rejector, const Example& example, double upstream) {
  std::vector<double> g(rejector.parameter_count(), 0.0);
  rejector.accumulate_gradient(example.features, upstream, g);
  return g;
}

Rejector init_rejector(const RejectorSpec& spec, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto draw = [&rng](std::size_t count, double scale, std::vector<double>& out) {
    std::uniform_real_distribution<double> u(-scale, scale);
    for (std::size_t i = 0; i < count; ++i) out.push_back(u(rng));
  };
  switch (spec.kind) {
    case RejectorKind::kConstant: return Rejector::constant(0.0);
    case RejectorKind::kScoreOffset: return Rejector::score_offset(spec.offset);
    case RejectorKind::kLinear: {
      if (dim == 0) throw ValidationError("linear rejector needs dim >= 1");
      std::vector<double> p;
      draw(dim + 1, 1.0 / std::sqrt(static_cast<double>(dim)), p);
      return Rejector::from_parameters(RejectorKind::kLinear, dim, 0, std::move(p));
    }
    case RejectorKind::kMlp1: {
      if (dim == 0) throw ValidationError("mlp1 rejector needs dim >= 1");
      if (spec.hidden == 0) throw ValidationError("mlp1 hidden width must be >= 1");
      std::vector<double> p;
      draw(spec.hidden * dim + spec.hidden, 1.0 / std::sqrt(static_cast<double>(dim)), p);
      draw(spec.hidden + 1, 1.0 / std::sqrt(static_cast<double>(spec.hidden)), p);
      return Rejector::mlp1(dim, spec.hidden, std::move(p));
    }
  }
  throw ValidationError("invalid rejector spec");
}

nlohmann::json rejector_to_json(const Rejector& rejector) {
  nlohmann::json j;
  j["variant"] = std::string(to_string(rejector.kind()));
  j["dim"] = rejector.dim();
  if (rejector.kind() == RejectorKind::kMlp1) j["hidden"] = rejector.hidden_width();
  j["parameters"] = std::vector<double>(rejector.parameters().begin(), rejector.parameters().end());
  return j;
}

Rejector rejector_from_json(const nlohmann::json& j) {
  try {
    const auto kind = parse_rejector_kind(j.at("variant").get<std::string>());
    const auto dim = j.value("dim", std::size_t{0});
    const auto hidden = j.value("hidden", std::size_t{0});
    auto params = j.at("parameters").get<std::vector<double>>();
    return Rejector::from_parameters(kind, dim, hidden, std::move(params));
  } catch (const nlohmann::json::exception& err) {
    throw ValidationError(std::string("malformed rejector JSON: ") + err.what());
  }
}

}  // namespace abstain

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "abstain/eval.hpp"
#include "abstain/losses.hpp"
#include "abstain/synthetic.hpp"
#include "abstain/train.hpp"

using namespace abstain;

static void BM_SurrogateLoss(benchmark::State& state) {
  const auto p = make_params(0.05, 4.0);
  std::vector<double> r(1024);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (auto& v : r) v = u(rng);
  for (auto _ : state) {
    double total = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) total += losses::surrogate_loss(r[i], (i & 1) ? 1 : -1, p);
    benchmark::DoNotOptimize(total);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(r.size()));
}
BENCHMARK(BM_SurrogateLoss);

static void BM_FitThreshold(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> scores(n);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = u(rng);
    labels[i] = u(rng) < scores[i] ? 1 : -1;
  }
  for (auto _ : state) benchmark::DoNotOptimize(eval::fit_threshold(scores, labels, 0.95));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FitThreshold)->RangeMultiplier(8)->Range(512, 1 << 18)->Complexity();

static void BM_TrainEpoch(benchmark::State& state) {
  const auto data = synthetic::sample(synthetic::default_task("piecewise"), 1500, 3);
  const auto p = make_params(0.05, 4.0);
  const auto kind = static_cast<RejectorKind>(state.range(0));
  const auto init = init_rejector({kind, 16}, data.dim(), 1);
  TrainConfig cfg;
  cfg.epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(train_surrogate(data, p, init, cfg));
  state.SetLabel(std::string(to_string(kind)));
}
BENCHMARK(BM_TrainEpoch)
    ->Arg(static_cast<int>(RejectorKind::kLinear))
    ->Arg(static_cast<int>(RejectorKind::kMlp1));

static void BM_ExcessRisks(benchmark::State& state) {
  const auto task = synthetic::default_task("logistic");
  const auto p = make_params(0.05, 2.0);
  const auto rj = synthetic::as_function(Rejector::linear({1.0}, -0.1));
  for (auto _ : state) benchmark::DoNotOptimize(synthetic::excess_risks(rj, task, p, 100000, 0));
}
BENCHMARK(BM_ExcessRisks)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include <vector>

#include "mevdro/adversary.hpp"
#include "mevdro/assignment.hpp"
#include "mevdro/dependence.hpp"
#include "mevdro/dro.hpp"
#include "mevdro/evt.hpp"
#include "mevdro/point_process.hpp"
#include "mevdro/random.hpp"

using namespace mevdro;

namespace {

const evt::DependenceModel kSl = evt::DependenceModel::symmetric_logistic(0.5);

void BM_SampleMaxStable(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  Rng rng = make_rng(1, stream::kData);
  for (auto _ : state) benchmark::DoNotOptimize(evt::sample_max_stable(rng, kSl, 1000, d));
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_SampleMaxStable)->Arg(2)->Arg(11);

void BM_SampleConfigurations(benchmark::State& state) {
  const auto truncation = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(pp::sample_configurations(2, kSl, 1000, truncation, 2, 1));
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_SampleConfigurations)->Arg(50)->Arg(200);

void BM_Assignment(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng = make_rng(3, stream::kData);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RowMatrix cost(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) cost(i, j) = u(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(solve_assignment(cost));
}
BENCHMARK(BM_Assignment)->Arg(16)->Arg(64)->Arg(200);

void BM_RobustCdf(benchmark::State& state) {
  const auto cfgs = pp::sample_configurations(4, kSl, static_cast<std::size_t>(state.range(0)), 200, 2, 1);
  const std::vector<double> x{1.0, 1.0};
  for (auto _ : state) benchmark::DoNotOptimize(dro::robust_cdf(cfgs, x, 0.05));
}
BENCHMARK(BM_RobustCdf)->Arg(1000)->Arg(10000);

void BM_RobustCvar(benchmark::State& state) {
  const auto cfgs = pp::sample_configurations(5, kSl, 10000, 200, 2, 1);
  for (auto _ : state) benchmark::DoNotOptimize(dro::robust_cvar(cfgs, 0.5, 0.95));
}
BENCHMARK(BM_RobustCvar);

double l1(std::span<const double> x) { return norm(x, Norm::L1); }

void BM_AdversarialRisk(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto batch = adversary::make_batch(kSl, n, 200, 2, 8, 6, stream::kAdversaryEval, 0);
  const adversary::AdversaryFamily family(2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        adversary::adversarial_risk(family, batch, l1, adversary::Mode::EvtConstrained, 0.1, Norm::L1));
  }
}
BENCHMARK(BM_AdversarialRisk)->Arg(128)->Arg(256);

void BM_TrainingIteration(benchmark::State& state) {
  adversary::TrainConfig config;
  config.samples = 128;
  config.eval_samples = 128;
  config.iterations = static_cast<std::size_t>(state.range(0));
  config.delta = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(adversary::run_dro_training(kSl, l1, adversary::Mode::EvtConstrained, config));
  }
}
BENCHMARK(BM_TrainingIteration)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

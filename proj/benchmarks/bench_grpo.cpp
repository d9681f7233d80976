#include <benchmark/benchmark.h>

#include "uqcal/grpo.hpp"
#include "uqcal/rng.hpp"

namespace {

void BM_TrainStep(benchmark::State& state) {
  // cost of one full training step at the default batch geometry, measured
  // by running short trainings and dividing
  const int questions = static_cast<int>(state.range(0));
  std::vector<uqcal::QuestionTarget> targets;
  uqcal::Rng rng(4);
  for (int q = 0; q < questions; ++q) {
    targets.push_back({"q" + std::to_string(q), rng.u01(), 0});
  }
  uqcal::TrainerConfig cfg;
  cfg.steps = 25;
  for (auto _ : state) {
    cfg.seed += 1;
    const auto result = uqcal::train(targets, uqcal::RewardKind::entropy, cfg);
    benchmark::DoNotOptimize(result.second.final_mean_reward);
  }
  state.SetItemsProcessed(state.iterations() * cfg.steps);
}
BENCHMARK(BM_TrainStep)->Arg(1)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_SampleGroup(benchmark::State& state) {
  uqcal::ToyPolicy policy({"q0"});
  uqcal::Rng rng(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        uqcal::sample_group(policy, "q0", 16, 1.5, rng).samples.size());
  }
}
BENCHMARK(BM_SampleGroup);

}  // namespace

BENCHMARK_MAIN();

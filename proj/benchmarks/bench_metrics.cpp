#include <benchmark/benchmark.h>

#include "uqcal/metrics.hpp"
#include "uqcal/rng.hpp"

namespace {

uqcal::EvaluationBatch make_batch(std::size_t n) {
  uqcal::Rng rng(777);
  std::vector<double> u(n);
  std::vector<int> z(n);
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = rng.u01();
    z[i] = rng.bernoulli(0.4);
  }
  z[0] = 0;
  z[n - 1] = 1;
  return uqcal::EvaluationBatch::make(std::move(u), std::move(z));
}

void BM_Auroc(benchmark::State& state) {
  const auto batch = make_batch(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(uqcal::auroc(batch));
  }
}
BENCHMARK(BM_Auroc)->Arg(1000)->Arg(10000)->Arg(100000);

void BM_Ece(benchmark::State& state) {
  const auto batch = make_batch(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(uqcal::ece(batch, 10).value);
  }
}
BENCHMARK(BM_Ece)->Arg(1000)->Arg(100000);

void BM_Spearman(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  uqcal::Rng rng(9);
  std::vector<double> a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = rng.u01();
    b[i] = rng.u01();
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(uqcal::spearman(a, b));
  }
}
BENCHMARK(BM_Spearman)->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();

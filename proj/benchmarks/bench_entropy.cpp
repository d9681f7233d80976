#include <benchmark/benchmark.h>

#include "uqcal/entropy.hpp"
#include "uqcal/rng.hpp"

namespace {

uqcal::EmbeddingSet make_embeddings(std::size_t n, std::size_t d) {
  uqcal::Rng rng(12345);
  std::vector<std::vector<double>> rows(n, std::vector<double>(d));
  for (auto& row : rows) {
    for (double& v : row) v = rng.normal();
  }
  return uqcal::EmbeddingSet::from_rows(std::move(rows));
}

void BM_ScoreSampleSet(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto d = static_cast<std::size_t>(state.range(1));
  uqcal::SampleSet set;
  set.embeddings = make_embeddings(n, d);
  const uqcal::KernelConfig cfg{uqcal::KernelKind::rbf, 0.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(uqcal::score_sample_set(set, cfg).score.value);
  }
}
BENCHMARK(BM_ScoreSampleSet)->Args({8, 16})->Args({16, 64})->Args({32, 64});

void BM_JacobiSpectrum(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto emb = make_embeddings(n, 32);
  const auto density = uqcal::normalize_to_density(
      uqcal::build_kernel(emb, {uqcal::KernelKind::rbf, 0.0}));
  for (auto _ : state) {
    benchmark::DoNotOptimize(uqcal::spectrum(density).eigenvalues.size());
  }
}
BENCHMARK(BM_JacobiSpectrum)->Arg(8)->Arg(16)->Arg(32);

}  // namespace

BENCHMARK_MAIN();

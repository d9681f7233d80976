#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "support/oracles.hpp"
#include "uqcal/entropy.hpp"
#include "uqcal/error.hpp"
#include "uqcal/rng.hpp"

using namespace uqcal;

namespace {

EmbeddingSet random_embeddings(std::size_t n, std::size_t d, Rng& rng) {
  std::vector<std::vector<double>> rows(n, std::vector<double>(d));
  for (auto& row : rows) {
    for (double& v : row) v = rng.normal();
  }
  return EmbeddingSet::from_rows(std::move(rows));
}

double score_of(const EmbeddingSet& e, const KernelConfig& cfg) {
  SampleSet set;
  set.embeddings = e;
  return score_sample_set(set, cfg).score.value;
}

}  // namespace

TEST_CASE("embedding set validation") {
  CHECK_THROWS_AS(EmbeddingSet::from_rows({}), Error);
  CHECK_THROWS_AS(EmbeddingSet::from_rows({{1.0, 2.0}, {1.0}}), Error);
  CHECK_THROWS_AS(EmbeddingSet::from_rows({{1.0, std::nan("")}}), Error);
  const EmbeddingSet ok = EmbeddingSet::from_rows({{1.0, 2.0}, {3.0, 4.0}});
  CHECK(ok.count() == 2);
  CHECK(ok.dim() == 2);
}

TEST_CASE("build_kernel: identical rows under rbf give all ones") {
  const auto e = EmbeddingSet::from_rows({{1.0, 0.0}, {1.0, 0.0}});
  const KernelMatrix k = build_kernel(e, {KernelKind::rbf, 1.0});
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      CHECK(k.entries(i, j) == doctest::Approx(1.0).epsilon(1e-15));
    }
  }
}

TEST_CASE("build_kernel: orthogonal rows under linear give shifted cosine") {
  const auto e = EmbeddingSet::from_rows({{1.0, 0.0}, {0.0, 1.0}});
  const KernelMatrix k = build_kernel(e, {KernelKind::linear, 0.0});
  CHECK(k.entries(0, 0) == doctest::Approx(1.0));
  CHECK(k.entries(1, 1) == doctest::Approx(1.0));
  CHECK(k.entries(0, 1) == doctest::Approx(0.5));
  CHECK(k.entries(1, 0) == doctest::Approx(0.5));
}

TEST_CASE("build_kernel: median-heuristic bandwidth on a single pair") {
  // One pairwise distance, so the median equals it and the off-diagonal
  // exponent is exactly -1/2.
  const double s = 1.0 / std::sqrt(2.0);
  const auto e = EmbeddingSet::from_rows({{1.0, 0.0}, {s, s}});
  const KernelMatrix k = build_kernel(e, {KernelKind::rbf, 0.0});
  CHECK(k.bandwidth == doctest::Approx(median_pairwise_distance(e)));
  CHECK(k.entries(0, 1) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
}

TEST_CASE("build_kernel errors") {
  const auto zero_row = EmbeddingSet::from_rows({{0.0, 0.0}, {1.0, 0.0}});
  CHECK_THROWS_AS(build_kernel(zero_row, {KernelKind::linear, 0.0}), Error);
  CHECK_THROWS_WITH_AS(build_kernel(zero_row, {KernelKind::linear, 0.0}),
                       doctest::Contains("zero norm"), Error);
  // rbf is defined for zero rows (distances still finite)
  CHECK_NOTHROW(build_kernel(zero_row, {KernelKind::rbf, 0.0}));
}

TEST_CASE("median heuristic falls back to 1 when all rows coincide") {
  const auto e = EmbeddingSet::from_rows({{2.0, 1.0}, {2.0, 1.0}});
  const KernelMatrix k = build_kernel(e, {KernelKind::rbf, 0.0});
  CHECK(k.bandwidth == doctest::Approx(1.0));
}

TEST_CASE("normalize_to_density on the spec matrices") {
  KernelMatrix k;
  k.kind = KernelKind::linear;

  SUBCASE("identity 3x3") {
    k.entries = SquareMatrix(3);
    for (std::size_t i = 0; i < 3; ++i) k.entries(i, i) = 1.0;
    const KernelMatrix d = normalize_to_density(k);
    CHECK(d.entries.trace() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(d.entries(0, 0) == doctest::Approx(1.0 / 3.0));
  }
  SUBCASE("all-ones 2x2") {
    k.entries = SquareMatrix(2, 1.0);
    const KernelMatrix d = normalize_to_density(k);
    for (double v : d.entries.data()) CHECK(v == doctest::Approx(0.5));
  }
  SUBCASE("[[2,1],[1,2]]") {
    k.entries = SquareMatrix(2);
    k.entries(0, 0) = 2.0;
    k.entries(1, 1) = 2.0;
    k.entries(0, 1) = 1.0;
    k.entries(1, 0) = 1.0;
    const KernelMatrix d = normalize_to_density(k);
    CHECK(d.entries(0, 0) == doctest::Approx(0.5));
    CHECK(d.entries(0, 1) == doctest::Approx(0.25));
  }
  SUBCASE("zero trace is degenerate") {
    k.entries = SquareMatrix(2, 0.0);
    CHECK_THROWS_AS(normalize_to_density(k), Error);
  }
}

TEST_CASE("spectrum matches closed forms") {
  KernelMatrix d;
  d.kind = KernelKind::linear;

  SUBCASE("scaled identity") {
    d.entries = SquareMatrix(3);
    for (std::size_t i = 0; i < 3; ++i) d.entries(i, i) = 1.0 / 3.0;
    const Spectrum s = spectrum(d);
    for (double v : s.eigenvalues) CHECK(v == doctest::Approx(1.0 / 3.0));
  }
  SUBCASE("rank-1 all-0.5") {
    d.entries = SquareMatrix(2, 0.5);
    const Spectrum s = spectrum(d);
    CHECK(s.eigenvalues[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.eigenvalues[1] == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("2x2 closed form") {
    d.entries = SquareMatrix(2);
    d.entries(0, 0) = 0.5;
    d.entries(1, 1) = 0.5;
    d.entries(0, 1) = 0.25;
    d.entries(1, 0) = 0.25;
    const Spectrum s = spectrum(d);
    CHECK(s.eigenvalues[0] == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(s.eigenvalues[1] == doctest::Approx(0.25).epsilon(1e-12));
  }
  SUBCASE("genuinely indefinite matrix raises not-psd") {
    d.entries = SquareMatrix(2);
    d.entries(0, 0) = 0.75;
    d.entries(1, 1) = 0.25;
    d.entries(0, 1) = 0.6;
    d.entries(1, 0) = 0.6;
    CHECK_THROWS_WITH_AS(spectrum(d), doctest::Contains("not PSD"), Error);
  }
  SUBCASE("non-unit trace is rejected") {
    d.entries = SquareMatrix(2);
    d.entries(0, 0) = 1.0;
    d.entries(1, 1) = 1.0;
    CHECK_THROWS_AS(spectrum(d), Error);
  }
}

TEST_CASE("von_neumann_entropy on frozen spectra") {
  CHECK(von_neumann_entropy(Spectrum{{1.0, 0.0}}).value == 0.0);
  CHECK(von_neumann_entropy(Spectrum{{0.25, 0.25, 0.25, 0.25}}).value ==
        doctest::Approx(1.3862943611198906).epsilon(1e-12));
  // -(0.75 ln 0.75 + 0.25 ln 0.25)
  CHECK(von_neumann_entropy(Spectrum{{0.75, 0.25}}).value ==
        doctest::Approx(0.5623351446188083).epsilon(1e-12));
}

TEST_CASE("score_sample_set composes the chain") {
  SUBCASE("five identical embeddings score zero") {
    const std::vector<double> row = {0.3, -1.2, 0.8};
    const auto e = EmbeddingSet::from_rows({row, row, row, row, row});
    CHECK(score_of(e, {KernelKind::rbf, 0.0}) <= 1e-8);
    CHECK(score_of(e, {KernelKind::linear, 0.0}) <= 1e-8);
  }
  SUBCASE("four orthogonal embeddings match the oracle, strictly inside") {
    const auto e = EmbeddingSet::from_rows({{1, 0, 0, 0},
                                            {0, 1, 0, 0},
                                            {0, 0, 1, 0},
                                            {0, 0, 0, 1}});
    const KernelConfig cfg{KernelKind::rbf, 0.0};
    const double h = score_of(e, cfg);

    const KernelMatrix density = normalize_to_density(build_kernel(e, cfg));
    const std::vector<double> eig = oracle::eigenvalues_eigen(density.entries);
    double h_oracle = 0.0;
    for (double v : eig) {
      if (v > 0.0) h_oracle -= v * std::log(v);
    }
    CHECK(h == doctest::Approx(h_oracle).epsilon(1e-10));
    CHECK(h > 0.0);
    CHECK(h < std::log(4.0));
  }
  SUBCASE("two orthogonal embeddings, linear kernel, frozen entropy") {
    const auto e = EmbeddingSet::from_rows({{1.0, 0.0}, {0.0, 1.0}});
    CHECK(score_of(e, {KernelKind::linear, 0.0}) ==
          doctest::Approx(0.5623351446188083).epsilon(1e-12));
  }
  SUBCASE("single sample is degenerate, not an error") {
    SampleSet set;
    set.embeddings = EmbeddingSet::from_rows({{1.0, 2.0}});
    const SampleScore s = score_sample_set(set, {KernelKind::rbf, 0.0});
    CHECK(s.score.value == 0.0);
    CHECK(s.degenerate_sample);
  }
}

TEST_CASE("entropy bounds over randomized embeddings") {
  Rng rng(20240811);
  for (int it = 0; it < 200; ++it) {
    const std::size_t n = 2 + rng.below(31);
    const std::size_t d = 2 + rng.below(63);
    const EmbeddingSet e = random_embeddings(n, d, rng);
    const KernelConfig cfg{it % 2 == 0 ? KernelKind::rbf : KernelKind::linear,
                           0.0};
    const double h = score_of(e, cfg);
    CHECK(h >= 0.0);
    CHECK(h <= std::log(static_cast<double>(n)) + 1e-9);
  }
}

TEST_CASE("maximality: uniform spectrum reaches ln N") {
  for (std::size_t n : {2u, 5u, 17u}) {
    KernelMatrix d;
    d.kind = KernelKind::rbf;
    d.entries = SquareMatrix(n);
    for (std::size_t i = 0; i < n; ++i) d.entries(i, i) = 1.0 / n;
    const double h = von_neumann_entropy(spectrum(d)).value;
    CHECK(std::fabs(h - std::log(static_cast<double>(n))) <= 1e-9);
  }
}

TEST_CASE("permutation invariance of the score") {
  Rng rng(99);
  for (int it = 0; it < 25; ++it) {
    const std::size_t n = 3 + rng.below(8);
    const EmbeddingSet e = random_embeddings(n, 6, rng);

    std::vector<std::vector<double>> shuffled = e.rows;
    for (std::size_t i = shuffled.size(); i > 1; --i) {
      std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
    }
    const EmbeddingSet p = EmbeddingSet::from_rows(shuffled);

    for (KernelKind kind : {KernelKind::rbf, KernelKind::linear}) {
      const KernelConfig cfg{kind, 0.0};
      CHECK(std::fabs(score_of(e, cfg) - score_of(p, cfg)) <= 1e-10);
    }
  }
}

TEST_CASE("scale invariance of the linear kernel score") {
  Rng rng(7);
  for (double scale : {0.003, 0.7, 42.0}) {
    const EmbeddingSet e = random_embeddings(6, 9, rng);
    std::vector<std::vector<double>> scaled = e.rows;
    for (auto& row : scaled) {
      for (double& v : row) v *= scale;
    }
    const KernelConfig cfg{KernelKind::linear, 0.0};
    CHECK(std::fabs(score_of(e, cfg) -
                    score_of(EmbeddingSet::from_rows(scaled), cfg)) <= 1e-10);
  }
}

TEST_CASE("jacobi spectra match the Eigen oracle on random densities") {
  Rng rng(31415);
  for (int it = 0; it < 100; ++it) {
    const std::size_t n = 2 + rng.below(5);  // up to 6
    const SquareMatrix m = oracle::random_density(n, rng);
    KernelMatrix d;
    d.kind = KernelKind::rbf;
    d.entries = m;
    const Spectrum s = spectrum(d);
    const std::vector<double> reference = oracle::eigenvalues_eigen(m);
    REQUIRE(s.eigenvalues.size() == reference.size());
    for (std::size_t i = 0; i < reference.size(); ++i) {
      CHECK(std::fabs(s.eigenvalues[i] - reference[i]) <= 1e-8);
    }
  }
}

TEST_CASE("spectrum sums to one after clamping") {
  Rng rng(555);
  for (int it = 0; it < 50; ++it) {
    const std::size_t n = 2 + rng.below(10);
    KernelMatrix d;
    d.kind = KernelKind::rbf;
    d.entries = oracle::random_density(n, rng);
    const Spectrum s = spectrum(d);
    const double sum =
        std::accumulate(s.eigenvalues.begin(), s.eigenvalues.end(), 0.0);
    CHECK(std::fabs(sum - 1.0) <= 1e-9);
    for (double v : s.eigenvalues) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0 + 1e-12);
    }
  }
}

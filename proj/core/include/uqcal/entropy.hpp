// entropy.hpp — semantic dispersion scoring.
//
// Given the embeddings of K sampled generations for one question, build a
// similarity kernel, normalize it to unit trace, and score dispersion as the
// von Neumann entropy of its spectrum: H = -sum_i lambda_i * ln(lambda_i).
// H is 0 when all samples collapse to one direction and ln(N) when the
// spectrum is uniform.

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "uqcal/linalg.hpp"

namespace uqcal {

// N embedding rows of identical dimension d; all components finite.
struct EmbeddingSet {
  std::vector<std::vector<double>> rows;

  // Validates N >= 1, d >= 1, equal row dimensions, finite components.
  static EmbeddingSet from_rows(std::vector<std::vector<double>> rows);

  std::size_t count() const { return rows.size(); }
  std::size_t dim() const { return rows.empty() ? 0 : rows.front().size(); }
};

enum class KernelKind { linear, rbf };

const char* kernel_kind_name(KernelKind kind) noexcept;
KernelKind kernel_kind_from_name(const std::string& name);

struct KernelConfig {
  KernelKind kind = KernelKind::rbf;
  // bandwidth > 0 uses the fixed value; bandwidth <= 0 selects the median
  // heuristic (median pairwise distance; 1.0 when that median is zero).
  double bandwidth = 0.0;
};

struct KernelMatrix {
  SquareMatrix entries;
  KernelKind kind = KernelKind::rbf;
  double bandwidth = 0.0;  // resolved value; meaningful for rbf only

  // Symmetry within 1e-12 and strictly positive diagonal.
  void validate_basic() const;
};

// Eigenvalues of the unit-trace kernel, sorted descending; each in [0,1],
// summing to 1.
struct Spectrum {
  std::vector<double> eigenvalues;
};

// Dispersion score in nats; 0 <= value <= ln(N).
struct EntropyScore {
  double value = 0.0;
};

// One question's sampled generations plus their embeddings. Texts are
// optional; scoring only consumes the embeddings.
struct SampleSet {
  std::string record_id;
  std::vector<std::string> texts;
  EmbeddingSet embeddings;
};

struct SampleScore {
  EntropyScore score;
  // Set when N == 1: the score is 0 by convention rather than by evidence.
  bool degenerate_sample = false;
};

// Median of the N*(N-1)/2 pairwise Euclidean distances (average of the two
// central values for even counts). Returns 0 for N < 2.
double median_pairwise_distance(const EmbeddingSet& embeddings);

// Pairwise similarity kernel over the embedding rows.
//   linear: rows scaled to unit norm, entry = (1 + <e_i, e_j>) / 2
//   rbf:    entry = exp(-||e_i - e_j||^2 / (2 b^2)), unit diagonal
KernelMatrix build_kernel(const EmbeddingSet& embeddings,
                          const KernelConfig& config);

// Divide every entry by the trace so the spectrum sums to 1.
KernelMatrix normalize_to_density(const KernelMatrix& kernel);

// Eigenvalues of the unit-trace kernel, descending. Values in [-1e-6, 0)
// are clamped to 0 (rounding noise) and the spectrum renormalized; anything
// below -1e-6 signals a broken kernel and raises not-psd.
Spectrum spectrum(const KernelMatrix& density);

// H = -sum lambda ln lambda with 0 ln 0 = 0, natural log.
EntropyScore von_neumann_entropy(const Spectrum& spec);

// build_kernel -> normalize_to_density -> spectrum -> von_neumann_entropy.
SampleScore score_sample_set(const SampleSet& samples,
                             const KernelConfig& config);

}  // namespace uqcal

#include "uqcal/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "uqcal/error.hpp"

namespace uqcal {

EmbeddingSet EmbeddingSet::from_rows(std::vector<std::vector<double>> rows) {
  if (rows.empty()) {
    raise(errc::invalid_input, "embedding set needs at least one row");
  }
  const std::size_t d = rows.front().size();
  if (d == 0) raise(errc::invalid_input, "embedding rows must have dimension >= 1");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != d) {
      raise(errc::invalid_input,
            "embedding row " + std::to_string(i) + " has dimension " +
                std::to_string(rows[i].size()) + ", expected " +
                std::to_string(d));
    }
    for (double v : rows[i]) {
      if (!std::isfinite(v)) {
        raise(errc::invalid_input,
              "embedding row " + std::to_string(i) +
                  " contains a non-finite component");
      }
    }
  }
  return EmbeddingSet{std::move(rows)};
}

const char* kernel_kind_name(KernelKind kind) noexcept {
  return kind == KernelKind::linear ? "linear" : "rbf";
}

KernelKind kernel_kind_from_name(const std::string& name) {
  if (name == "linear") return KernelKind::linear;
  if (name == "rbf") return KernelKind::rbf;
  raise(errc::config_error, "unknown kernel kind: " + name);
}

void KernelMatrix::validate_basic() const {
  if (entries.max_symmetry_gap() > 1e-12) {
    raise(errc::invalid_input, "kernel matrix is not symmetric within 1e-12");
  }
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!(entries(i, i) > 0.0)) {
      raise(errc::invalid_input,
            "kernel diagonal entry " + std::to_string(i) +
                " is not strictly positive");
    }
  }
}

namespace {

double squared_distance(const std::vector<double>& a,
                        const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

}  // namespace

double median_pairwise_distance(const EmbeddingSet& embeddings) {
  const std::size_t n = embeddings.count();
  if (n < 2) return 0.0;
  std::vector<double> dists;
  dists.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      dists.push_back(
          std::sqrt(squared_distance(embeddings.rows[i], embeddings.rows[j])));
    }
  }
  std::sort(dists.begin(), dists.end());
  const std::size_t m = dists.size();
  if (m % 2 == 1) return dists[m / 2];
  return 0.5 * (dists[m / 2 - 1] + dists[m / 2]);
}

KernelMatrix build_kernel(const EmbeddingSet& embeddings,
                          const KernelConfig& config) {
  const std::size_t n = embeddings.count();
  if (n == 0) raise(errc::invalid_input, "cannot build a kernel over 0 rows");

  KernelMatrix out;
  out.kind = config.kind;
  out.entries = SquareMatrix(n);

  if (config.kind == KernelKind::linear) {
    // Unit-normalize rows, then shift cosine similarity into [0, 1] so the
    // matrix stays PSD even for antipodal rows: (1 + s) / 2 adds the PSD
    // all-ones matrix to the Gram matrix.
    std::vector<std::vector<double>> unit(n);
    for (std::size_t i = 0; i < n; ++i) {
      double norm2 = 0.0;
      for (double v : embeddings.rows[i]) norm2 += v * v;
      const double norm = std::sqrt(norm2);
      if (norm == 0.0) {
        raise(errc::degenerate_embedding,
              "row " + std::to_string(i) +
                  " has zero norm; linear kernel undefined");
      }
      unit[i] = embeddings.rows[i];
      for (double& v : unit[i]) v /= norm;
    }
    for (std::size_t i = 0; i < n; ++i) {
      out.entries(i, i) = 1.0;
      for (std::size_t j = i + 1; j < n; ++j) {
        double dot = 0.0;
        for (std::size_t k = 0; k < unit[i].size(); ++k) {
          dot += unit[i][k] * unit[j][k];
        }
        const double v = 0.5 * (1.0 + dot);
        out.entries(i, j) = v;
        out.entries(j, i) = v;
      }
    }
    return out;
  }

  // rbf
  double bandwidth = config.bandwidth;
  if (!(bandwidth > 0.0)) {
    bandwidth = median_pairwise_distance(embeddings);
    if (bandwidth == 0.0) bandwidth = 1.0;
  }
  out.bandwidth = bandwidth;
  const double inv = 1.0 / (2.0 * bandwidth * bandwidth);
  for (std::size_t i = 0; i < n; ++i) {
    out.entries(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v =
          std::exp(-squared_distance(embeddings.rows[i], embeddings.rows[j]) *
                   inv);
      out.entries(i, j) = v;
      out.entries(j, i) = v;
    }
  }
  return out;
}

KernelMatrix normalize_to_density(const KernelMatrix& kernel) {
  const double tr = kernel.entries.trace();
  if (!(tr > 0.0)) {
    raise(errc::degenerate_kernel,
          "kernel trace must be positive, got " + std::to_string(tr));
  }
  KernelMatrix out = kernel;
  for (double& v : out.entries.data()) v /= tr;
  return out;
}

Spectrum spectrum(const KernelMatrix& density) {
  const std::size_t n = density.entries.size();
  if (n == 0) raise(errc::invalid_input, "empty kernel matrix");
  if (density.entries.max_symmetry_gap() > 1e-12) {
    raise(errc::invalid_input, "density matrix is not symmetric within 1e-12");
  }
  const double tr = density.entries.trace();
  if (std::fabs(tr - 1.0) > 1e-9) {
    raise(errc::invalid_input,
          "density matrix trace is " + std::to_string(tr) + ", expected 1");
  }

  std::vector<double> eig = jacobi_eigenvalues(density.entries);

  double sum = 0.0;
  for (double& v : eig) {
    if (v < -1e-6) {
      raise(errc::not_psd, "eigenvalue " + std::to_string(v) +
                               " below -1e-6; kernel is not PSD");
    }
    if (v < 0.0) v = 0.0;  // rounding noise
    sum += v;
  }
  if (!(sum > 0.0)) raise(errc::degenerate_kernel, "spectrum sums to zero");
  for (double& v : eig) v /= sum;

  std::sort(eig.begin(), eig.end(), std::greater<double>());
  return Spectrum{std::move(eig)};
}

EntropyScore von_neumann_entropy(const Spectrum& spec) {
  double h = 0.0;
  for (double lambda : spec.eigenvalues) {
    if (lambda > 0.0) h -= lambda * std::log(lambda);
  }
  // -0.0 from a pure spectrum is still zero entropy.
  if (h <= 0.0) h = 0.0;
  return EntropyScore{h};
}

SampleScore score_sample_set(const SampleSet& samples,
                             const KernelConfig& config) {
  if (samples.embeddings.count() == 1) {
    return SampleScore{EntropyScore{0.0}, /*degenerate_sample=*/true};
  }
  const KernelMatrix kernel = build_kernel(samples.embeddings, config);
  const KernelMatrix density = normalize_to_density(kernel);
  const Spectrum spec = spectrum(density);
  return SampleScore{von_neumann_entropy(spec), false};
}

}  // namespace uqcal

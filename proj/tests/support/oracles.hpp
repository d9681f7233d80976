// oracles.hpp — independent reference implementations used only by tests.
//
// Each oracle takes a deliberately different route from the production code
// it checks: pairwise counting instead of midranks, Eigen's solver instead
// of the in-tree Jacobi, closed forms where they exist.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "uqcal/linalg.hpp"
#include "uqcal/rng.hpp"

namespace oracle {

// O(n^2) AUROC: count label-discordant pairs, ties half-credited.
inline double auroc_pairwise(const std::vector<double>& u,
                             const std::vector<int>& z) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (z[i] != 1) continue;
    for (std::size_t j = 0; j < u.size(); ++j) {
      if (z[j] != 0) continue;
      pairs += 1.0;
      if (u[i] > u[j]) {
        wins += 1.0;
      } else if (u[i] == u[j]) {
        wins += 0.5;
      }
    }
  }
  return wins / pairs;
}

// Midranks by per-element counting, no sort.
inline std::vector<double> ranks_by_counting(const std::vector<double>& v) {
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::size_t below = 0;
    std::size_t equal = 0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (v[j] < v[i]) ++below;
      if (v[j] == v[i]) ++equal;
    }
    ranks[i] = static_cast<double>(below) +
               (static_cast<double>(equal) + 1.0) / 2.0;
  }
  return ranks;
}

inline double pearson(const std::vector<double>& a,
                      const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  return cov / std::sqrt(va * vb);
}

inline double spearman_explicit(const std::vector<double>& a,
                                const std::vector<double>& b) {
  return pearson(ranks_by_counting(a), ranks_by_counting(b));
}

// Eigenvalues via Eigen's self-adjoint solver, descending.
inline std::vector<double> eigenvalues_eigen(const uqcal::SquareMatrix& m) {
  const auto n = static_cast<Eigen::Index>(m.size());
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      a(i, j) = m(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      a, Eigen::EigenvaluesOnly);
  std::vector<double> eig(solver.eigenvalues().data(),
                          solver.eigenvalues().data() + n);
  std::sort(eig.begin(), eig.end(), std::greater<double>());
  return eig;
}

// Closed-form eigenvalues of a symmetric 2x2 [[a,b],[b,c]], descending.
inline std::vector<double> eigenvalues_2x2(double a, double b, double c) {
  const double mean = 0.5 * (a + c);
  const double r = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
  return {mean + r, mean - r};
}

// Random symmetric PSD matrix with unit trace: G^T G from a random Gaussian
// G, normalized.
inline uqcal::SquareMatrix random_density(std::size_t n, uqcal::Rng& rng) {
  std::vector<std::vector<double>> g(n, std::vector<double>(n));
  for (auto& row : g) {
    for (double& v : row) v = rng.normal();
  }
  uqcal::SquareMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += g[k][i] * g[k][j];
      m(i, j) = s;
    }
  }
  const double tr = m.trace();
  for (double& v : m.data()) v /= tr;
  return m;
}

// Central finite difference of a scalar function.
inline double central_difference(const std::function<double(double)>& f,
                                 double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace oracle

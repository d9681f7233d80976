// linalg.hpp — dense square matrices and a symmetric eigensolver.
//
// Kernel matrices here are small (one row per sampled generation, so
// typically N <= 32); the cyclic Jacobi method is used for its robustness
// at that size.

#pragma once

#include <cstddef>
#include <vector>

namespace uqcal {

// Row-major dense square matrix.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n, double fill = 0.0)
      : n_(n), a_(n * n, fill) {}

  std::size_t size() const { return n_; }

  double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const {
    return a_[i * n_ + j];
  }

  double trace() const;
  double frobenius_norm() const;
  // max over i<j of |a(i,j) - a(j,i)|
  double max_symmetry_gap() const;

  const std::vector<double>& data() const { return a_; }
  std::vector<double>& data() { return a_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> a_;
};

// Eigenvalues of a symmetric matrix via cyclic Jacobi rotations, unsorted.
// Converged when the off-diagonal Frobenius mass drops below
// tol * ||A||_F; at most max_sweeps full sweeps. The input is taken by
// value and diagonalized in place.
std::vector<double> jacobi_eigenvalues(SquareMatrix a, double tol = 1e-12,
                                       int max_sweeps = 100);

}  // namespace uqcal

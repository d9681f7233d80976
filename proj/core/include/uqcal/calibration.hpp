// calibration.hpp — Platt scaling from raw dispersion scores to calibrated
// error probabilities.
//
// Fits p = sigmoid(A*s + B) to binary incorrectness labels by minimizing the
// summed negative log-likelihood. The map preserves score ordering whenever
// A != 0, so ranking metrics are unchanged by calibration.

#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace uqcal {

struct FitMeta {
  int iterations = 0;
  double final_nll = 0.0;
  bool converged = false;
};

struct CalibrationModel {
  double slope_a = 0.0;
  double intercept_b = 0.0;
  FitMeta fit_meta;
};

// One labeled point: raw score s and z in {0,1}, z = 1 meaning the answer
// was incorrect.
struct CalibrationPoint {
  double score = 0.0;
  int label = 0;
};

struct CalibrationDataset {
  std::vector<CalibrationPoint> points;

  // Validates finite scores and labels in {0,1}.
  static CalibrationDataset from_points(std::vector<CalibrationPoint> points);

  std::size_t size() const { return points.size(); }
  std::size_t count_label(int label) const;
};

// Calibrated probability of incorrectness; sigmoid output, open (0,1).
struct CalibratedTarget {
  double value = 0.5;
};

struct PlattFitConfig {
  int max_iterations = 100;
  // Converged when the euclidean norm of the NLL gradient drops below this.
  double gradient_tol = 1e-8;
  // Platt's smoothed targets (N+ + 1)/(N+ + 2) and 1/(N- + 2) instead of
  // raw 0/1 labels. Off by default.
  bool label_smoothing = false;
};

// Overflow-safe logistic function; exact to double precision for |x| <= 700.
double stable_sigmoid(double x);

// Summed NLL with probabilities clamped to [1e-12, 1 - 1e-12] before logs.
double nll(const CalibrationModel& model, const CalibrationDataset& data);

// Analytic (dNLL/dA, dNLL/dB); what the fitter drives to zero.
std::array<double, 2> nll_gradient(const CalibrationModel& model,
                                   const CalibrationDataset& data);

// Damped Newton fit of (A, B). Requires >= 10 points with both classes
// present. Falls back to gradient descent with backtracking when the Hessian
// is singular; on iteration exhaustion returns the best iterate with
// converged = false.
CalibrationModel fit_platt(const CalibrationDataset& data,
                           const PlattFitConfig& config = {});

// sigmoid(A*s + B), clamped into the open interval (0, 1).
CalibratedTarget apply(const CalibrationModel& model, double score);

}  // namespace uqcal

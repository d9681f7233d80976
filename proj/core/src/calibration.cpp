#include "uqcal/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "uqcal/error.hpp"

namespace uqcal {

CalibrationDataset CalibrationDataset::from_points(
    std::vector<CalibrationPoint> points) {
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i].score)) {
      raise(errc::invalid_input,
            "calibration point " + std::to_string(i) + " has non-finite score");
    }
    if (points[i].label != 0 && points[i].label != 1) {
      raise(errc::invalid_input,
            "calibration point " + std::to_string(i) + " has label " +
                std::to_string(points[i].label) + ", expected 0 or 1");
    }
  }
  return CalibrationDataset{std::move(points)};
}

std::size_t CalibrationDataset::count_label(int label) const {
  std::size_t c = 0;
  for (const auto& p : points) {
    if (p.label == label) ++c;
  }
  return c;
}

double stable_sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace {

constexpr double kProbClamp = 1e-12;

double clamped(double p) {
  return std::min(std::max(p, kProbClamp), 1.0 - kProbClamp);
}

// NLL against arbitrary targets in [0,1]; binary labels are the t in {0,1}
// case, Platt's label smoothing supplies fractional t.
double nll_targets(double a, double b, const CalibrationDataset& data,
                   const std::vector<double>& targets) {
  double total = 0.0;
  for (std::size_t i = 0; i < data.points.size(); ++i) {
    const double p = clamped(stable_sigmoid(a * data.points[i].score + b));
    const double t = targets[i];
    total -= t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
  }
  return total;
}

std::array<double, 2> gradient_targets(double a, double b,
                                       const CalibrationDataset& data,
                                       const std::vector<double>& targets) {
  double ga = 0.0, gb = 0.0;
  for (std::size_t i = 0; i < data.points.size(); ++i) {
    const double s = data.points[i].score;
    const double p = stable_sigmoid(a * s + b);
    const double r = p - targets[i];
    ga += r * s;
    gb += r;
  }
  return {ga, gb};
}

std::array<double, 3> hessian_targets(double a, double b,
                                      const CalibrationDataset& data) {
  // Symmetric 2x2: [h_aa, h_ab, h_bb]. Independent of the targets.
  double haa = 0.0, hab = 0.0, hbb = 0.0;
  for (const auto& pt : data.points) {
    const double p = stable_sigmoid(a * pt.score + b);
    const double w = p * (1.0 - p);
    haa += w * pt.score * pt.score;
    hab += w * pt.score;
    hbb += w;
  }
  return {haa, hab, hbb};
}

}  // namespace

double nll(const CalibrationModel& model, const CalibrationDataset& data) {
  std::vector<double> targets(data.points.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    targets[i] = static_cast<double>(data.points[i].label);
  }
  return nll_targets(model.slope_a, model.intercept_b, data, targets);
}

std::array<double, 2> nll_gradient(const CalibrationModel& model,
                                   const CalibrationDataset& data) {
  std::vector<double> targets(data.points.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    targets[i] = static_cast<double>(data.points[i].label);
  }
  return gradient_targets(model.slope_a, model.intercept_b, data, targets);
}

CalibrationModel fit_platt(const CalibrationDataset& data,
                           const PlattFitConfig& config) {
  const std::size_t n = data.size();
  if (n < 10) {
    raise(errc::insufficient_data,
          "platt fit needs >= 10 points, got " + std::to_string(n));
  }
  const std::size_t n_pos = data.count_label(1);
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    raise(errc::inseparable_data,
          "platt fit needs both label classes; got " + std::to_string(n_pos) +
              " incorrect of " + std::to_string(n));
  }

  std::vector<double> targets(n);
  if (config.label_smoothing) {
    const double t_pos = (static_cast<double>(n_pos) + 1.0) /
                         (static_cast<double>(n_pos) + 2.0);
    const double t_neg = 1.0 / (static_cast<double>(n_neg) + 2.0);
    for (std::size_t i = 0; i < n; ++i) {
      targets[i] = data.points[i].label == 1 ? t_pos : t_neg;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      targets[i] = static_cast<double>(data.points[i].label);
    }
  }

  // Start at the best constant model: A = 0, B = log-odds of the incorrect
  // class.
  double a = 0.0;
  double b = std::log(static_cast<double>(n_pos) / static_cast<double>(n_neg));
  double current = nll_targets(a, b, data, targets);

  CalibrationModel model;
  int iter = 0;
  bool converged = false;

  for (; iter < config.max_iterations; ++iter) {
    const auto g = gradient_targets(a, b, data, targets);
    const double gnorm = std::hypot(g[0], g[1]);
    if (gnorm <= config.gradient_tol) {
      converged = true;
      break;
    }

    const auto h = hessian_targets(a, b, data);
    const double det = h[0] * h[2] - h[1] * h[1];
    const double scale = std::max({std::fabs(h[0]), std::fabs(h[2]), 1.0});

    double da, db;
    if (std::isfinite(det) && std::fabs(det) > 1e-12 * scale * scale) {
      // Newton direction: -H^{-1} g.
      da = -(h[2] * g[0] - h[1] * g[1]) / det;
      db = -(h[0] * g[1] - h[1] * g[0]) / det;
    } else {
      // Singular Hessian (e.g. constant scores): steepest descent, unit-ish
      // scaled by the gradient itself.
      da = -g[0] / std::max(gnorm, 1.0);
      db = -g[1] / std::max(gnorm, 1.0);
    }

    // Damping: halve the step until the NLL does not increase.
    double step = 1.0;
    double next = nll_targets(a + step * da, b + step * db, data, targets);
    int halvings = 0;
    while (next > current && halvings < 60) {
      step *= 0.5;
      next = nll_targets(a + step * da, b + step * db, data, targets);
      ++halvings;
    }
    if (next > current) break;  // no progress possible along this direction

    a += step * da;
    b += step * db;
    current = next;
  }

  if (!converged) {
    // The final step may have landed inside tolerance.
    const auto g = gradient_targets(a, b, data, targets);
    converged = std::hypot(g[0], g[1]) <= config.gradient_tol;
  }

  model.slope_a = a;
  model.intercept_b = b;
  model.fit_meta.iterations = iter;
  model.fit_meta.converged = converged;
  // Report the NLL on the raw binary labels regardless of smoothing.
  model.fit_meta.final_nll = nll(model, data);
  return model;
}

CalibratedTarget apply(const CalibrationModel& model, double score) {
  if (!std::isfinite(score)) {
    raise(errc::invalid_input, "apply: score must be finite");
  }
  double p = stable_sigmoid(model.slope_a * score + model.intercept_b);
  // Keep the output in the open interval even under saturation.
  const double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
  p = std::min(std::max(p, std::numeric_limits<double>::min()), hi);
  return CalibratedTarget{p};
}

}  // namespace uqcal

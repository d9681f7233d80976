#include "uqcal/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "uqcal/error.hpp"

namespace uqcal {

EvaluationBatch EvaluationBatch::make(std::vector<double> predictions,
                                      std::vector<int> labels,
                                      std::vector<double> targets) {
  if (predictions.empty()) raise(errc::empty_input, "empty evaluation batch");
  if (labels.size() != predictions.size()) {
    raise(errc::invalid_input, "predictions and labels differ in length");
  }
  if (!targets.empty() && targets.size() != predictions.size()) {
    raise(errc::invalid_input, "targets length does not match predictions");
  }
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double u = predictions[i];
    if (!std::isfinite(u) || u < 0.0 || u > 1.0) {
      raise(errc::invalid_input,
            "prediction " + std::to_string(i) + " outside [0,1]");
    }
    if (labels[i] != 0 && labels[i] != 1) {
      raise(errc::invalid_input, "label " + std::to_string(i) + " not binary");
    }
  }
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (!std::isfinite(targets[i]) || targets[i] < 0.0 || targets[i] > 1.0) {
      raise(errc::invalid_input,
            "target " + std::to_string(i) + " outside [0,1]");
    }
  }
  return EvaluationBatch{std::move(predictions), std::move(labels),
                         std::move(targets)};
}

EceResult ece(const EvaluationBatch& batch, int num_bins) {
  if (num_bins < 1) raise(errc::invalid_input, "num_bins must be >= 1");
  if (batch.predictions.empty()) raise(errc::empty_input, "empty batch");

  const std::size_t n = batch.size();
  const double width = 1.0 / num_bins;

  std::vector<ReliabilityBin> bins(static_cast<std::size_t>(num_bins));
  std::vector<double> sum_u(bins.size(), 0.0);
  std::vector<double> sum_z(bins.size(), 0.0);
  for (std::size_t b = 0; b < bins.size(); ++b) {
    bins[b].lo = b * width;
    bins[b].hi = (b + 1 == bins.size()) ? 1.0 : (b + 1) * width;
  }

  for (std::size_t i = 0; i < n; ++i) {
    // floor into equal-width bins, with u = 1.0 joining the last bin
    // (right-closed at 1.0).
    auto idx = static_cast<std::size_t>(batch.predictions[i] * num_bins);
    if (idx >= bins.size()) idx = bins.size() - 1;
    bins[idx].count += 1;
    sum_u[idx] += batch.predictions[i];
    sum_z[idx] += batch.labels[i];
  }

  double value = 0.0;
  for (std::size_t b = 0; b < bins.size(); ++b) {
    if (bins[b].count == 0) continue;
    const double cnt = static_cast<double>(bins[b].count);
    bins[b].mean_prediction = sum_u[b] / cnt;
    bins[b].error_rate = sum_z[b] / cnt;
    value += (cnt / static_cast<double>(n)) *
             std::fabs(bins[b].mean_prediction - bins[b].error_rate);
  }
  return EceResult{value, std::move(bins)};
}

std::vector<double> midranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });

  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    // 1-based ranks i+1 .. j+1 averaged over the tie group.
    const double mid = 0.5 * (static_cast<double>(i + 1) +
                              static_cast<double>(j + 1));
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mid;
    i = j + 1;
  }
  return ranks;
}

double auroc(const EvaluationBatch& batch) {
  const std::size_t n = batch.size();
  std::size_t n_pos = 0;
  for (int z : batch.labels) n_pos += static_cast<std::size_t>(z);
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    raise(errc::undefined_metric,
          "auroc undefined: labels contain a single class");
  }

  const std::vector<double> ranks = midranks(batch.predictions);
  double rank_sum_pos = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (batch.labels[i] == 1) rank_sum_pos += ranks[i];
  }
  const double np = static_cast<double>(n_pos);
  const double nn = static_cast<double>(n_neg);
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) {
    raise(errc::invalid_input, "spearman: sequence lengths differ");
  }
  if (a.size() < 2) {
    raise(errc::invalid_input, "spearman: need at least 2 points");
  }
  const auto constant = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(),
                       [&](double x) { return x == v.front(); });
  };
  if (constant(a) || constant(b)) {
    raise(errc::undefined_metric,
          "spearman undefined on a constant sequence");
  }

  const std::vector<double> ra = midranks(a);
  const std::vector<double> rb = midranks(b);
  const double n = static_cast<double>(a.size());

  double mean_a = 0.0, mean_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    mean_a += ra[i];
    mean_b += rb[i];
  }
  mean_a /= n;
  mean_b /= n;

  double cov = 0.0, var_a = 0.0, var_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = ra[i] - mean_a;
    const double db = rb[i] - mean_b;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  if (var_a == 0.0 || var_b == 0.0) {
    raise(errc::undefined_metric, "spearman undefined: rank variance is zero");
  }
  return cov / std::sqrt(var_a * var_b);
}

MetricsReport evaluate_batch(const EvaluationBatch& batch, int num_bins) {
  MetricsReport report;
  report.n = batch.size();

  EceResult e = ece(batch, num_bins);
  report.ece_value = e.value;
  report.bins = std::move(e.bins);

  try {
    report.auroc_value = auroc(batch);
  } catch (const Error& err) {
    if (err.code() != errc::undefined_metric) throw;
    report.auroc_note = err.what();
  }

  if (!batch.targets.empty()) {
    try {
      report.spearman_value = spearman(batch.predictions, batch.targets);
    } catch (const Error& err) {
      if (err.code() != errc::undefined_metric) throw;
      report.spearman_note = err.what();
    }
  }
  return report;
}

std::string metrics_to_json(const MetricsReport& report) {
  nlohmann::ordered_json j;
  j["n"] = report.n;
  j["ece"] = report.ece_value;
  if (report.auroc_value) {
    j["auroc"] = *report.auroc_value;
  } else {
    j["auroc"] = nullptr;
    j["auroc_error"] = report.auroc_note;
  }
  if (report.spearman_value) {
    j["spearman"] = *report.spearman_value;
  } else if (!report.spearman_note.empty()) {
    j["spearman"] = nullptr;
    j["spearman_error"] = report.spearman_note;
  }
  j["bins"] = nlohmann::ordered_json::array();
  for (const auto& b : report.bins) {
    j["bins"].push_back({{"bin_lo", b.lo},
                         {"bin_hi", b.hi},
                         {"count", b.count},
                         {"mean_u", b.mean_prediction},
                         {"error_rate", b.error_rate}});
  }
  return j.dump(2) + "\n";
}

std::string metrics_to_table(const MetricsReport& report) {
  std::ostringstream out;
  out << "n        " << report.n << "\n";
  out << "ece      " << report.ece_value << "\n";
  if (report.auroc_value) {
    out << "auroc    " << *report.auroc_value << "\n";
  } else {
    out << "auroc    undefined (" << report.auroc_note << ")\n";
  }
  if (report.spearman_value) {
    out << "spearman " << *report.spearman_value << "\n";
  } else if (!report.spearman_note.empty()) {
    out << "spearman undefined (" << report.spearman_note << ")\n";
  }
  out << "\nbin_lo bin_hi count mean_u error_rate\n";
  for (const auto& b : report.bins) {
    out << b.lo << " " << b.hi << " " << b.count << " " << b.mean_prediction
        << " " << b.error_rate << "\n";
  }
  return out.str();
}

std::string reliability_to_csv(const std::vector<ReliabilityBin>& bins) {
  std::ostringstream out;
  out << "bin_lo,bin_hi,count,mean_u,error_rate\n";
  out.precision(17);
  for (const auto& b : bins) {
    out << b.lo << ',' << b.hi << ',' << b.count << ',' << b.mean_prediction
        << ',' << b.error_rate << "\n";
  }
  return out.str();
}

}  // namespace uqcal

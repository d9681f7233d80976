// metrics.hpp — uncertainty-quality metrics: ECE, AUROC, Spearman.
//
// Predictions u are probabilities that the answer is WRONG; labels z use
// z = 1 for an incorrect answer. Ties are handled with midranks everywhere.

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace uqcal {

struct EvaluationBatch {
  std::vector<double> predictions;  // u in [0,1]
  std::vector<int> labels;          // z in {0,1}, 1 = incorrect
  std::vector<double> targets;      // u_cal in [0,1]; empty when absent

  // Validates equal lengths >= 1, ranges, finiteness. targets may be empty.
  static EvaluationBatch make(std::vector<double> predictions,
                              std::vector<int> labels,
                              std::vector<double> targets = {});

  std::size_t size() const { return predictions.size(); }
};

struct ReliabilityBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  double mean_prediction = 0.0;
  double error_rate = 0.0;
};

struct EceResult {
  double value = 0.0;
  std::vector<ReliabilityBin> bins;
};

// Equal-width bins on u over [0,1], right-closed at 1.0; per-bin gap is
// |mean u - empirical error rate|, weighted by bin mass. Empty bins
// contribute 0.
EceResult ece(const EvaluationBatch& batch, int num_bins = 10);

// Probability that a random incorrect example outranks a random correct one
// under u, ties half-counted; midrank formulation, O(n log n).
// Raises undefined-metric when only one label class is present.
double auroc(const EvaluationBatch& batch);

// Pearson correlation of midranks. Raises undefined-metric when either
// sequence is constant; lengths must match and be >= 2.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

// Midranks (1-based, ties averaged); shared by auroc and spearman.
std::vector<double> midranks(const std::vector<double>& values);

struct MetricsReport {
  double ece_value = 0.0;
  std::optional<double> auroc_value;     // absent when undefined
  std::string auroc_note;                // reason when absent
  std::optional<double> spearman_value;  // absent without targets
  std::string spearman_note;
  std::size_t n = 0;
  std::vector<ReliabilityBin> bins;
};

// Full report; degenerate AUROC/Spearman become absent fields with a note
// instead of errors.
MetricsReport evaluate_batch(const EvaluationBatch& batch, int num_bins = 10);

std::string metrics_to_json(const MetricsReport& report);
std::string metrics_to_table(const MetricsReport& report);
// Columns: bin_lo, bin_hi, count, mean_u, error_rate.
std::string reliability_to_csv(const std::vector<ReliabilityBin>& bins);

}  // namespace uqcal

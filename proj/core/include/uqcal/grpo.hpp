// grpo.hpp — desk-scale group relative policy optimization.
//
// The policy under training is a per-question categorical distribution over
// a fixed uncertainty grid (softmax of per-question logits at a sampling
// temperature). Each step samples groups of predictions, scores them with a
// verifiable reward, normalizes rewards within each group into advantages,
// and ascends the resulting policy gradient. The grid makes the reward
// landscape exactly enumerable, so convergence is checkable against a
// brute-force optimum.

#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "uqcal/rewards.hpp"
#include "uqcal/rng.hpp"

namespace uqcal {

struct TrainerConfig {
  int group_size = 16;
  int batch_size = 32;
  int steps = 1000;
  double sampling_temperature = 1.5;
  double learning_rate = 0.05;
  double std_guard_eps = 1e-8;
  // KL regularization toward the frozen reference policy; 0 disables it.
  double kl_coeff = 0.0;
  // Ratio clipping half-width; only active when update_epochs > 1 makes
  // updates off-policy. With one update per batch the ratio is exactly 1.
  double clip_eps = 0.2;
  int update_epochs = 1;
  std::uint64_t seed = 0;
  // Grid resolution; 21 levels give step 0.05, matching the reward floor so
  // the flat band always contains a grid point.
  int grid_levels = 21;

  void validate() const;  // throws config_error
};

class ToyPolicy {
 public:
  ToyPolicy(std::vector<std::string> question_ids, int grid_levels = 21);

  const std::vector<double>& grid() const { return grid_; }
  std::size_t grid_size() const { return grid_.size(); }
  std::size_t question_count() const { return ids_.size(); }
  const std::vector<std::string>& question_ids() const { return ids_; }

  // Throws missing-policy-row for unknown ids.
  std::size_t row_index(const std::string& question_id) const;

  const std::vector<double>& logits(std::size_t row) const {
    return logits_[row];
  }
  std::vector<double>& mutable_logits(std::size_t row) { return logits_[row]; }
  const std::vector<double>& reference_logits(std::size_t row) const {
    return reference_[row];
  }

  // softmax(logits / temperature); sums to 1.
  std::vector<double> probabilities(std::size_t row, double temperature) const;
  std::vector<double> log_probabilities(std::size_t row,
                                        double temperature) const;

  // E_pi[u] under the sampling distribution at `temperature`.
  double expected_uncertainty(std::size_t row, double temperature) const;

  // Snapshot the current logits as the KL reference.
  void freeze_reference() { reference_ = logits_; }

 private:
  std::vector<double> grid_;
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<double>> logits_;
  std::vector<std::vector<double>> reference_;
};

// One group of G sampled predictions for a single question.
struct GroupRollout {
  std::size_t question_row = 0;
  std::string question_id;
  std::vector<int> sample_indices;        // grid indices, length G
  std::vector<double> samples;            // grid values
  std::vector<double> behavior_log_probs; // log pi at sampling time
  std::vector<double> rewards;
  std::vector<double> advantages;
  double group_mean = 0.0;
  double group_std = 0.0;                 // population std
  bool guarded = false;                   // advantages zeroed by the std guard
};

// Draw G predictions from softmax(logits/T); deterministic given rng state.
GroupRollout sample_group(const ToyPolicy& policy,
                          const std::string& question_id, int group_size,
                          double temperature, Rng& rng);

// a_i = (r_i - mean) / population std; all zeros when the std is below
// std_guard_eps (common once rewards sit on the flat band).
std::vector<double> compute_advantages(const std::vector<double>& rewards,
                                       double std_guard_eps);

// Gradient of the surrogate objective with respect to every logits row.
// Per question: the mean over its groups in the batch of
// sum_i a_i * grad log pi(u_i), with PPO-style ratio clipping against the
// recorded behavior probabilities (inactive on-policy), minus
// kl_coeff * grad KL(pi || reference).
std::vector<std::vector<double>> policy_gradient(
    const ToyPolicy& policy, const std::vector<GroupRollout>& rollouts,
    const TrainerConfig& config);

// On-policy surrogate the gradient above differentiates:
//   J = sum_q [ (1/n_q) sum_{groups of q} sum_i a_i log pi(u_i)
//               - kl_coeff * KL(pi_q || ref_q) ].
// Exposed for finite-difference verification.
double surrogate_objective(const ToyPolicy& policy,
                           const std::vector<GroupRollout>& rollouts,
                           const TrainerConfig& config);

// Ascent step: logits += learning_rate * gradient. Grid and reference stay
// fixed. Raises training-divergence on a non-finite gradient.
void policy_update(ToyPolicy& policy, const std::vector<GroupRollout>& rollouts,
                   const TrainerConfig& config);

// Per-question training target: u_cal drives the entropy reward, the
// incorrect label drives the brier reward.
struct QuestionTarget {
  std::string id;
  double u_cal = 0.5;
  int incorrect = 0;
};

struct TrainingReport {
  std::vector<double> mean_reward_curve;   // one entry per step
  std::vector<double> mean_abs_gap_curve;  // mean_q |E_pi[u] - target_q|
  double final_mean_reward = 0.0;
  double final_mean_abs_gap = 0.0;
  std::size_t format_failures = 0;  // always 0 for the toy policy
  double wall_clock_seconds = 0.0;
};

// Full GRPO loop; deterministic given config.seed.
std::pair<ToyPolicy, TrainingReport> train(
    const std::vector<QuestionTarget>& targets, RewardKind reward_kind,
    const TrainerConfig& config);

std::string training_report_to_json(const TrainingReport& report);
// Columns: step, mean_reward, mean_abs_gap.
std::string reward_curve_to_csv(const TrainingReport& report);

}  // namespace uqcal

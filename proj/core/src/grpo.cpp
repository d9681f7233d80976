#include "uqcal/grpo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "uqcal/error.hpp"

namespace uqcal {

void TrainerConfig::validate() const {
  if (group_size < 2) raise(errc::config_error, "group_size must be >= 2");
  if (batch_size < 1) raise(errc::config_error, "batch_size must be >= 1");
  if (steps < 0) raise(errc::config_error, "steps must be >= 0");
  if (!(sampling_temperature > 0.0)) {
    raise(errc::config_error, "sampling_temperature must be > 0");
  }
  if (!(learning_rate > 0.0)) {
    raise(errc::config_error, "learning_rate must be > 0");
  }
  if (std_guard_eps < 0.0) {
    raise(errc::config_error, "std_guard_eps must be >= 0");
  }
  if (kl_coeff < 0.0) raise(errc::config_error, "kl_coeff must be >= 0");
  if (!(clip_eps > 0.0)) raise(errc::config_error, "clip_eps must be > 0");
  if (update_epochs < 1) {
    raise(errc::config_error, "update_epochs must be >= 1");
  }
  if (grid_levels < 2) raise(errc::config_error, "grid_levels must be >= 2");
}

ToyPolicy::ToyPolicy(std::vector<std::string> question_ids, int grid_levels)
    : ids_(std::move(question_ids)) {
  if (grid_levels < 2) raise(errc::config_error, "grid needs >= 2 levels");
  if (ids_.empty()) {
    raise(errc::invalid_input, "policy needs at least one question");
  }
  grid_.resize(static_cast<std::size_t>(grid_levels));
  for (std::size_t m = 0; m < grid_.size(); ++m) {
    grid_[m] = static_cast<double>(m) / static_cast<double>(grid_levels - 1);
  }
  for (std::size_t q = 0; q < ids_.size(); ++q) {
    if (!index_.emplace(ids_[q], q).second) {
      raise(errc::duplicate_id, "duplicate question id: " + ids_[q]);
    }
  }
  logits_.assign(ids_.size(), std::vector<double>(grid_.size(), 0.0));
  reference_ = logits_;
}

std::size_t ToyPolicy::row_index(const std::string& question_id) const {
  const auto it = index_.find(question_id);
  if (it == index_.end()) {
    raise(errc::missing_policy_row,
          "question not known to the policy: " + question_id);
  }
  return it->second;
}

std::vector<double> ToyPolicy::log_probabilities(std::size_t row,
                                                 double temperature) const {
  const std::vector<double>& l = logits_[row];
  std::vector<double> out(l.size());
  double max_scaled = -std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < l.size(); ++m) {
    out[m] = l[m] / temperature;
    max_scaled = std::max(max_scaled, out[m]);
  }
  double sum = 0.0;
  for (double v : out) sum += std::exp(v - max_scaled);
  const double lse = max_scaled + std::log(sum);
  for (double& v : out) v -= lse;
  return out;
}

std::vector<double> ToyPolicy::probabilities(std::size_t row,
                                             double temperature) const {
  std::vector<double> p = log_probabilities(row, temperature);
  for (double& v : p) v = std::exp(v);
  return p;
}

double ToyPolicy::expected_uncertainty(std::size_t row,
                                       double temperature) const {
  const std::vector<double> p = probabilities(row, temperature);
  double e = 0.0;
  for (std::size_t m = 0; m < p.size(); ++m) e += p[m] * grid_[m];
  return e;
}

GroupRollout sample_group(const ToyPolicy& policy,
                          const std::string& question_id, int group_size,
                          double temperature, Rng& rng) {
  if (group_size < 2) raise(errc::invalid_input, "group size must be >= 2");
  const std::size_t row = policy.row_index(question_id);
  const std::vector<double> logp = policy.log_probabilities(row, temperature);

  std::vector<double> cdf(logp.size());
  double acc = 0.0;
  for (std::size_t m = 0; m < logp.size(); ++m) {
    acc += std::exp(logp[m]);
    cdf[m] = acc;
  }

  GroupRollout out;
  out.question_row = row;
  out.question_id = question_id;
  out.sample_indices.reserve(static_cast<std::size_t>(group_size));
  out.samples.reserve(static_cast<std::size_t>(group_size));
  out.behavior_log_probs.reserve(static_cast<std::size_t>(group_size));
  for (int i = 0; i < group_size; ++i) {
    const double u = rng.u01() * acc;  // acc absorbs rounding in the cdf tail
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    std::size_t m = static_cast<std::size_t>(it - cdf.begin());
    if (m >= logp.size()) m = logp.size() - 1;
    out.sample_indices.push_back(static_cast<int>(m));
    out.samples.push_back(policy.grid()[m]);
    out.behavior_log_probs.push_back(logp[m]);
  }
  return out;
}

std::vector<double> compute_advantages(const std::vector<double>& rewards,
                                       double std_guard_eps) {
  const std::size_t g = rewards.size();
  if (g < 2) raise(errc::invalid_input, "advantages need a group of >= 2");

  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= static_cast<double>(g);

  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  var /= static_cast<double>(g);
  const double std_pop = std::sqrt(var);

  std::vector<double> adv(g, 0.0);
  if (std_pop < std_guard_eps) return adv;
  for (std::size_t i = 0; i < g; ++i) adv[i] = (rewards[i] - mean) / std_pop;
  return adv;
}

namespace {

// KL(pi || ref) and its logit gradient for one row.
double kl_and_gradient(const ToyPolicy& policy, std::size_t row,
                       double temperature, std::vector<double>* grad_out) {
  const std::vector<double> logp = policy.log_probabilities(row, temperature);

  // Reference log-probabilities from the frozen logits.
  const std::vector<double>& ref = policy.reference_logits(row);
  std::vector<double> ref_logp(ref.size());
  double max_scaled = -std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < ref.size(); ++m) {
    ref_logp[m] = ref[m] / temperature;
    max_scaled = std::max(max_scaled, ref_logp[m]);
  }
  double sum = 0.0;
  for (double v : ref_logp) sum += std::exp(v - max_scaled);
  const double lse = max_scaled + std::log(sum);
  for (double& v : ref_logp) v -= lse;

  double kl = 0.0;
  for (std::size_t m = 0; m < logp.size(); ++m) {
    kl += std::exp(logp[m]) * (logp[m] - ref_logp[m]);
  }
  if (grad_out != nullptr) {
    grad_out->assign(logp.size(), 0.0);
    // dKL/dl_j = (pi_j / T) * (log(pi_j / ref_j) - KL)
    for (std::size_t m = 0; m < logp.size(); ++m) {
      (*grad_out)[m] = std::exp(logp[m]) / temperature *
                       ((logp[m] - ref_logp[m]) - kl);
    }
  }
  return kl;
}

void check_rollouts(const ToyPolicy& policy,
                    const std::vector<GroupRollout>& rollouts) {
  for (const auto& r : rollouts) {
    const std::size_t row = policy.row_index(r.question_id);
    if (row != r.question_row) {
      raise(errc::invalid_input,
            "rollout row does not match the policy table for " +
                r.question_id);
    }
    if (r.sample_indices.size() != r.advantages.size() ||
        r.sample_indices.size() != r.behavior_log_probs.size()) {
      raise(errc::invalid_input, "rollout field lengths disagree");
    }
  }
}

}  // namespace

std::vector<std::vector<double>> policy_gradient(
    const ToyPolicy& policy, const std::vector<GroupRollout>& rollouts,
    const TrainerConfig& config) {
  check_rollouts(policy, rollouts);
  const double temperature = config.sampling_temperature;
  const std::size_t grid = policy.grid_size();

  std::vector<std::vector<double>> grad(policy.question_count(),
                                        std::vector<double>(grid, 0.0));
  std::vector<int> groups_per_row(policy.question_count(), 0);
  for (const auto& r : rollouts) groups_per_row[r.question_row] += 1;

  std::vector<bool> touched(policy.question_count(), false);

  for (const auto& rollout : rollouts) {
    const std::size_t row = rollout.question_row;
    touched[row] = true;
    const std::vector<double> logp =
        policy.log_probabilities(row, temperature);
    std::vector<double> p(grid);
    for (std::size_t m = 0; m < grid; ++m) p[m] = std::exp(logp[m]);

    const double inv_groups = 1.0 / groups_per_row[row];

    for (std::size_t i = 0; i < rollout.sample_indices.size(); ++i) {
      const double a = rollout.advantages[i];
      if (a == 0.0) continue;
      const auto m = static_cast<std::size_t>(rollout.sample_indices[i]);
      const double ratio = std::exp(logp[m] - rollout.behavior_log_probs[i]);

      // min(ratio*a, clip(ratio)*a): once the clipped branch is active its
      // gradient is zero.
      const bool active = a >= 0.0 ? ratio <= 1.0 + config.clip_eps
                                   : ratio >= 1.0 - config.clip_eps;
      if (!active) continue;

      const double w = inv_groups * a * ratio / temperature;
      // grad log pi(m) = (e_m - pi) / T
      for (std::size_t k = 0; k < grid; ++k) grad[row][k] -= w * p[k];
      grad[row][m] += w;
    }
  }

  if (config.kl_coeff > 0.0) {
    std::vector<double> kl_grad;
    for (std::size_t row = 0; row < policy.question_count(); ++row) {
      if (!touched[row]) continue;
      kl_and_gradient(policy, row, temperature, &kl_grad);
      for (std::size_t k = 0; k < grid; ++k) {
        grad[row][k] -= config.kl_coeff * kl_grad[k];
      }
    }
  }
  return grad;
}

double surrogate_objective(const ToyPolicy& policy,
                           const std::vector<GroupRollout>& rollouts,
                           const TrainerConfig& config) {
  check_rollouts(policy, rollouts);
  const double temperature = config.sampling_temperature;

  std::vector<int> groups_per_row(policy.question_count(), 0);
  for (const auto& r : rollouts) groups_per_row[r.question_row] += 1;
  std::vector<bool> touched(policy.question_count(), false);

  double j = 0.0;
  for (const auto& rollout : rollouts) {
    const std::size_t row = rollout.question_row;
    touched[row] = true;
    const std::vector<double> logp =
        policy.log_probabilities(row, temperature);
    const double inv_groups = 1.0 / groups_per_row[row];
    for (std::size_t i = 0; i < rollout.sample_indices.size(); ++i) {
      const auto m = static_cast<std::size_t>(rollout.sample_indices[i]);
      j += inv_groups * rollout.advantages[i] * logp[m];
    }
  }

  if (config.kl_coeff > 0.0) {
    for (std::size_t row = 0; row < policy.question_count(); ++row) {
      if (!touched[row]) continue;
      j -= config.kl_coeff *
           kl_and_gradient(policy, row, temperature, nullptr);
    }
  }
  return j;
}

void policy_update(ToyPolicy& policy, const std::vector<GroupRollout>& rollouts,
                   const TrainerConfig& config) {
  const std::vector<std::vector<double>> grad =
      policy_gradient(policy, rollouts, config);
  for (std::size_t row = 0; row < grad.size(); ++row) {
    for (double v : grad[row]) {
      if (!std::isfinite(v)) {
        raise(errc::training_divergence,
              "non-finite policy gradient for question " +
                  policy.question_ids()[row]);
      }
    }
  }
  for (std::size_t row = 0; row < grad.size(); ++row) {
    std::vector<double>& l = policy.mutable_logits(row);
    for (std::size_t k = 0; k < l.size(); ++k) {
      l[k] += config.learning_rate * grad[row][k];
    }
  }
}

std::pair<ToyPolicy, TrainingReport> train(
    const std::vector<QuestionTarget>& targets, RewardKind reward_kind,
    const TrainerConfig& config) {
  config.validate();
  if (targets.empty()) {
    raise(errc::invalid_input, "train needs at least one question");
  }

  std::vector<std::string> ids;
  ids.reserve(targets.size());
  for (const auto& t : targets) ids.push_back(t.id);

  ToyPolicy policy(std::move(ids), config.grid_levels);
  policy.freeze_reference();

  const auto t0 = std::chrono::steady_clock::now();
  TrainingReport report;
  report.mean_reward_curve.reserve(static_cast<std::size_t>(config.steps));
  report.mean_abs_gap_curve.reserve(static_cast<std::size_t>(config.steps));

  const auto target_value = [&](std::size_t q) {
    return reward_kind == RewardKind::entropy
               ? targets[q].u_cal
               : static_cast<double>(targets[q].incorrect);
  };

  Rng question_picker(derive_seed(config.seed, "grpo-questions"));
  const std::uint64_t group_master = derive_seed(config.seed, "grpo-groups");

  for (int step = 0; step < config.steps; ++step) {
    std::vector<GroupRollout> rollouts;
    rollouts.reserve(static_cast<std::size_t>(config.batch_size));

    double reward_sum = 0.0;
    std::size_t reward_count = 0;

    for (int slot = 0; slot < config.batch_size; ++slot) {
      const auto q = static_cast<std::size_t>(
          question_picker.below(targets.size()));
      // Per-slot stream, independent of execution order within the step.
      const std::uint64_t tag =
          (static_cast<std::uint64_t>(step) << 20) ^
          static_cast<std::uint64_t>(slot);
      Rng slot_rng(derive_seed(group_master, tag));

      GroupRollout rollout =
          sample_group(policy, targets[q].id, config.group_size,
                       config.sampling_temperature, slot_rng);

      rollout.rewards.reserve(rollout.samples.size());
      for (double u : rollout.samples) {
        const UncertaintyPrediction pred{u, true, false};
        const RewardValue r =
            reward_kind == RewardKind::entropy
                ? entropy_reward(pred, CalibratedTarget{targets[q].u_cal})
                : brier_reward(pred, targets[q].incorrect);
        rollout.rewards.push_back(r.value);
        reward_sum += r.value;
        ++reward_count;
      }

      rollout.advantages =
          compute_advantages(rollout.rewards, config.std_guard_eps);
      double mean = 0.0;
      for (double r : rollout.rewards) mean += r;
      mean /= static_cast<double>(rollout.rewards.size());
      double var = 0.0;
      for (double r : rollout.rewards) var += (r - mean) * (r - mean);
      var /= static_cast<double>(rollout.rewards.size());
      rollout.group_mean = mean;
      rollout.group_std = std::sqrt(var);
      rollout.guarded = rollout.group_std < config.std_guard_eps;

      rollouts.push_back(std::move(rollout));
    }

    for (int epoch = 0; epoch < config.update_epochs; ++epoch) {
      policy_update(policy, rollouts, config);
    }

    report.mean_reward_curve.push_back(reward_sum /
                                       static_cast<double>(reward_count));

    double gap_sum = 0.0;
    for (std::size_t q = 0; q < targets.size(); ++q) {
      const double e =
          policy.expected_uncertainty(q, config.sampling_temperature);
      gap_sum += std::fabs(e - target_value(q));
    }
    report.mean_abs_gap_curve.push_back(gap_sum /
                                        static_cast<double>(targets.size()));
  }

  report.final_mean_reward =
      report.mean_reward_curve.empty() ? 0.0 : report.mean_reward_curve.back();
  double gap_sum = 0.0;
  for (std::size_t q = 0; q < targets.size(); ++q) {
    gap_sum += std::fabs(
        policy.expected_uncertainty(q, config.sampling_temperature) -
        target_value(q));
  }
  report.final_mean_abs_gap = gap_sum / static_cast<double>(targets.size());
  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return {std::move(policy), std::move(report)};
}

std::string training_report_to_json(const TrainingReport& report) {
  nlohmann::ordered_json j;
  j["steps"] = report.mean_reward_curve.size();
  j["final_mean_reward"] = report.final_mean_reward;
  j["final_mean_abs_gap"] = report.final_mean_abs_gap;
  j["format_failures"] = report.format_failures;
  j["wall_clock_seconds"] = report.wall_clock_seconds;
  j["mean_reward_curve"] = report.mean_reward_curve;
  j["mean_abs_gap_curve"] = report.mean_abs_gap_curve;
  return j.dump(2) + "\n";
}

std::string reward_curve_to_csv(const TrainingReport& report) {
  std::ostringstream out;
  out << "step,mean_reward,mean_abs_gap\n";
  out.precision(17);
  for (std::size_t s = 0; s < report.mean_reward_curve.size(); ++s) {
    out << s << ',' << report.mean_reward_curve[s] << ','
        << report.mean_abs_gap_curve[s] << "\n";
  }
  return out.str();
}

}  // namespace uqcal

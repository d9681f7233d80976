// rewards.hpp — verifiable rewards for uncertainty training.
//
// entropy_reward: 1 - max(0.05, |u_theta - u_cal|); flat at 0.95 on the
// band |gap| <= 0.05, strictly decreasing outside it, range [0, 0.95].
// brier_reward:   1 - (u_theta - z)^2, range [0, 1].
// A prediction that failed to parse earns 0 and is flagged.

#pragma once

#include <string>
#include <vector>

#include "uqcal/calibration.hpp"

namespace uqcal {

// Scalar uncertainty extracted from model output.
struct UncertaintyPrediction {
  double value = 0.0;
  bool parse_ok = true;  // false when no parseable value was found
  bool clamped = false;  // true when the parsed value was outside [0,1]
};

enum class RewardKind { entropy, brier };

const char* reward_kind_name(RewardKind kind) noexcept;
RewardKind reward_kind_from_name(const std::string& name);

struct RewardValue {
  double value = 0.0;
  bool format_failure = false;  // reward forced to 0 by a parse failure
};

RewardValue entropy_reward(const UncertaintyPrediction& u_theta,
                           const CalibratedTarget& u_cal);

RewardValue brier_reward(const UncertaintyPrediction& u_theta, int incorrect);

// Elementwise reward over aligned sequences; targets_or_labels carries
// u_cal values for entropy and 0/1 labels for brier.
std::vector<RewardValue> batch_rewards(
    RewardKind kind, const std::vector<UncertaintyPrediction>& predictions,
    const std::vector<double>& targets_or_labels);

}  // namespace uqcal

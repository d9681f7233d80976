#include "uqcal/rewards.hpp"

#include <cmath>

#include "uqcal/error.hpp"

namespace uqcal {

const char* reward_kind_name(RewardKind kind) noexcept {
  return kind == RewardKind::entropy ? "entropy" : "brier";
}

RewardKind reward_kind_from_name(const std::string& name) {
  if (name == "entropy") return RewardKind::entropy;
  if (name == "brier") return RewardKind::brier;
  raise(errc::config_error, "unknown reward kind: " + name);
}

namespace {

void check_unit_interval(double v, const char* what) {
  if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
    raise(errc::invalid_input, std::string(what) + " must lie in [0,1]");
  }
}

}  // namespace

RewardValue entropy_reward(const UncertaintyPrediction& u_theta,
                           const CalibratedTarget& u_cal) {
  check_unit_interval(u_cal.value, "calibrated target");
  if (!u_theta.parse_ok) return RewardValue{0.0, true};
  check_unit_interval(u_theta.value, "uncertainty prediction");
  const double gap = std::fabs(u_theta.value - u_cal.value);
  return RewardValue{1.0 - std::max(0.05, gap), false};
}

RewardValue brier_reward(const UncertaintyPrediction& u_theta, int incorrect) {
  if (incorrect != 0 && incorrect != 1) {
    raise(errc::invalid_input, "incorrect flag must be 0 or 1");
  }
  if (!u_theta.parse_ok) return RewardValue{0.0, true};
  check_unit_interval(u_theta.value, "uncertainty prediction");
  const double d = u_theta.value - static_cast<double>(incorrect);
  return RewardValue{1.0 - d * d, false};
}

std::vector<RewardValue> batch_rewards(
    RewardKind kind, const std::vector<UncertaintyPrediction>& predictions,
    const std::vector<double>& targets_or_labels) {
  if (predictions.size() != targets_or_labels.size()) {
    raise(errc::invalid_input,
          "batch_rewards: predictions and targets differ in length");
  }
  std::vector<RewardValue> out;
  out.reserve(predictions.size());
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (kind == RewardKind::entropy) {
      out.push_back(
          entropy_reward(predictions[i], CalibratedTarget{targets_or_labels[i]}));
    } else {
      const double t = targets_or_labels[i];
      if (t != 0.0 && t != 1.0) {
        raise(errc::invalid_input,
              "brier labels must be exactly 0 or 1, got " + std::to_string(t));
      }
      out.push_back(brier_reward(predictions[i], static_cast<int>(t)));
    }
  }
  return out;
}

}  // namespace uqcal

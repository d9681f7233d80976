#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "support/oracles.hpp"
#include "uqcal/error.hpp"
#include "uqcal/grpo.hpp"

using namespace uqcal;

namespace {

ToyPolicy one_question_policy(int grid_levels = 21) {
  return ToyPolicy({"q0"}, grid_levels);
}

GroupRollout manual_rollout(const ToyPolicy& policy,
                            const std::vector<int>& indices,
                            const std::vector<double>& rewards,
                            const TrainerConfig& cfg) {
  GroupRollout r;
  r.question_row = 0;
  r.question_id = policy.question_ids()[0];
  r.sample_indices = indices;
  const auto logp =
      policy.log_probabilities(0, cfg.sampling_temperature);
  for (int m : indices) {
    r.samples.push_back(policy.grid()[static_cast<std::size_t>(m)]);
    r.behavior_log_probs.push_back(logp[static_cast<std::size_t>(m)]);
  }
  r.rewards = rewards;
  r.advantages = compute_advantages(rewards, cfg.std_guard_eps);
  return r;
}

}  // namespace

TEST_CASE("trainer config validation") {
  TrainerConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.group_size = 1;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = TrainerConfig{};
  cfg.sampling_temperature = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = TrainerConfig{};
  cfg.learning_rate = -0.1;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("policy grid spans [0,1] with 0.05 steps by default") {
  const ToyPolicy policy = one_question_policy();
  REQUIRE(policy.grid_size() == 21);
  CHECK(policy.grid().front() == doctest::Approx(0.0));
  CHECK(policy.grid().back() == doctest::Approx(1.0));
  CHECK(policy.grid()[6] == doctest::Approx(0.3));
  for (std::size_t m = 1; m < policy.grid_size(); ++m) {
    CHECK(policy.grid()[m] > policy.grid()[m - 1]);
  }
}

TEST_CASE("policy probabilities sum to one") {
  ToyPolicy policy({"a", "b"});
  auto& l = policy.mutable_logits(1);
  for (std::size_t m = 0; m < l.size(); ++m) l[m] = 0.3 * m - 2.0;
  for (std::size_t row : {0u, 1u}) {
    const auto p = policy.probabilities(row, 1.5);
    double sum = 0.0;
    for (double v : p) sum += v;
    CHECK(std::fabs(sum - 1.0) <= 1e-9);
  }
  CHECK_THROWS_AS(policy.row_index("unknown"), Error);
}

TEST_CASE("sample_group: uniform logits give uniform frequencies") {
  const ToyPolicy policy = one_question_policy();
  Rng rng(424242);
  const int groups = 6250;  // 6250 * 16 = 1e5 draws
  std::vector<std::size_t> counts(policy.grid_size(), 0);
  for (int g = 0; g < groups; ++g) {
    const GroupRollout r = sample_group(policy, "q0", 16, 1.5, rng);
    for (int m : r.sample_indices) counts[static_cast<std::size_t>(m)] += 1;
  }
  const double n = 1e5;
  const double p = 1.0 / static_cast<double>(policy.grid_size());
  const double sigma = std::sqrt(n * p * (1.0 - p));
  for (std::size_t m = 0; m < counts.size(); ++m) {
    CHECK(std::fabs(static_cast<double>(counts[m]) - n * p) <= 3.0 * sigma);
  }
}

TEST_CASE("sample_group: saturated logit wins every draw") {
  ToyPolicy policy = one_question_policy();
  policy.mutable_logits(0)[13] = 1000.0;
  Rng rng(1);
  const GroupRollout r = sample_group(policy, "q0", 16, 1.5, rng);
  for (int m : r.sample_indices) CHECK(m == 13);
}

TEST_CASE("sample_group: huge temperature flattens any logits") {
  ToyPolicy policy = one_question_policy();
  auto& l = policy.mutable_logits(0);
  Rng init(5);
  for (double& v : l) v = init.uniform(-3.0, 3.0);

  Rng rng(777);
  std::vector<std::size_t> counts(policy.grid_size(), 0);
  const int groups = 6250;
  for (int g = 0; g < groups; ++g) {
    const GroupRollout r = sample_group(policy, "q0", 16, 1e6, rng);
    for (int m : r.sample_indices) counts[static_cast<std::size_t>(m)] += 1;
  }
  // chi-squared against uniform; 20 dof, generous 0.001-level bound
  const double n = 1e5;
  const double expected = n / static_cast<double>(policy.grid_size());
  double chi2 = 0.0;
  for (std::size_t c : counts) {
    const double d = static_cast<double>(c) - expected;
    chi2 += d * d / expected;
  }
  CHECK(chi2 < 45.3);
}

TEST_CASE("sample_group rejects unknown questions") {
  const ToyPolicy policy = one_question_policy();
  Rng rng(3);
  CHECK_THROWS_WITH_AS(sample_group(policy, "nope", 4, 1.5, rng),
                       doctest::Contains("not known"), Error);
}

TEST_CASE("compute_advantages on the spec cases") {
  SUBCASE("all equal rewards trip the std guard") {
    const auto a = compute_advantages({0.95, 0.95, 0.95, 0.95}, 1e-8);
    for (double v : a) CHECK(v == 0.0);
  }
  SUBCASE("two-point group") {
    const auto a = compute_advantages({0.95, 0.45}, 1e-8);
    CHECK(a[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(a[1] == doctest::Approx(-1.0).epsilon(1e-12));
  }
  SUBCASE("frozen four-point group") {
    const auto a = compute_advantages({1.0, 0.0, 0.0, 0.0}, 1e-8);
    CHECK(a[0] == doctest::Approx(1.7320508075688772).epsilon(1e-9));
    for (int i = 1; i < 4; ++i) {
      CHECK(a[i] == doctest::Approx(-0.5773502691896258).epsilon(1e-9));
    }
  }
}

TEST_CASE("advantage normalization invariants") {
  Rng rng(2718);
  for (int it = 0; it < 200; ++it) {
    const std::size_t g = 2 + rng.below(31);
    std::vector<double> rewards(g);
    for (double& r : rewards) r = rng.u01();
    const auto a = compute_advantages(rewards, 1e-8);

    double mean = 0.0;
    for (double v : a) mean += v;
    mean /= static_cast<double>(g);
    double var = 0.0;
    for (double v : a) var += (v - mean) * (v - mean);
    var /= static_cast<double>(g);

    CHECK(std::fabs(mean) <= 1e-9);
    CHECK(std::fabs(std::sqrt(var) - 1.0) <= 1e-6);

    // shift invariance
    std::vector<double> shifted = rewards;
    for (double& r : shifted) r += 123.456;
    const auto b = compute_advantages(shifted, 1e-8);
    for (std::size_t i = 0; i < g; ++i) {
      CHECK(std::fabs(a[i] - b[i]) <= 1e-9);
    }

    // permutation maps through
    std::vector<double> perm = rewards;
    std::swap(perm[0], perm[g - 1]);
    const auto c = compute_advantages(perm, 1e-8);
    CHECK(c[0] == doctest::Approx(a[g - 1]).epsilon(1e-12));
    CHECK(c[g - 1] == doctest::Approx(a[0]).epsilon(1e-12));
  }
}

TEST_CASE("policy_update: zero advantages leave logits unchanged") {
  TrainerConfig cfg;
  ToyPolicy policy = one_question_policy();
  const GroupRollout r = manual_rollout(policy, {1, 5, 5, 9},
                                        {0.5, 0.5, 0.5, 0.5}, cfg);
  const std::vector<double> before = policy.logits(0);
  policy_update(policy, {r}, cfg);
  CHECK(policy.logits(0) == before);
}

TEST_CASE("policy_update: positive-advantage index rises, sampled rivals fall") {
  TrainerConfig cfg;
  ToyPolicy policy = one_question_policy();
  // one winning sample at 6, losers at 10; unsampled indices get no term
  // because group advantages sum to zero.
  const GroupRollout r = manual_rollout(policy, {6, 10, 10, 10},
                                        {1.0, 0.0, 0.0, 0.0}, cfg);
  policy_update(policy, {r}, cfg);
  const auto& l = policy.logits(0);
  CHECK(l[6] > 0.0);
  CHECK(l[10] < 0.0);
  for (std::size_t m = 0; m < l.size(); ++m) {
    if (m == 6 || m == 10) continue;
    CHECK(std::fabs(l[m]) <= 1e-15);
  }
  // reference logits stay frozen
  for (double v : policy.reference_logits(0)) CHECK(v == 0.0);
}

TEST_CASE("policy gradient matches finite differences of the surrogate") {
  for (double kl_coeff : {0.0, 0.3}) {
    TrainerConfig cfg;
    cfg.kl_coeff = kl_coeff;
    cfg.grid_levels = 9;

    ToyPolicy policy({"a", "b"}, cfg.grid_levels);
    Rng init(99);
    for (std::size_t row : {0u, 1u}) {
      for (double& v : policy.mutable_logits(row)) {
        v = init.uniform(-1.0, 1.0);
      }
    }
    policy.freeze_reference();
    // move away from the reference so the KL term is active
    for (double& v : policy.mutable_logits(0)) v += 0.37;

    Rng rng(1234);
    std::vector<GroupRollout> rollouts;
    for (const char* id : {"a", "b", "a"}) {
      GroupRollout r = sample_group(policy, id, 8, cfg.sampling_temperature,
                                    rng);
      for (double u : r.samples) r.rewards.push_back(1.0 - std::fabs(u - 0.4));
      r.advantages = compute_advantages(r.rewards, cfg.std_guard_eps);
      rollouts.push_back(std::move(r));
    }

    const auto grad = policy_gradient(policy, rollouts, cfg);
    const double h = 1e-5;
    for (std::size_t row = 0; row < policy.question_count(); ++row) {
      for (std::size_t m = 0; m < policy.grid_size(); ++m) {
        const double saved = policy.logits(row)[m];
        auto& logits = policy.mutable_logits(row);
        logits[m] = saved + h;
        const double up = surrogate_objective(policy, rollouts, cfg);
        logits[m] = saved - h;
        const double dn = surrogate_objective(policy, rollouts, cfg);
        logits[m] = saved;
        const double fd = (up - dn) / (2.0 * h);
        const double scale = std::max({1.0, std::fabs(fd)});
        CHECK(std::fabs(grad[row][m] - fd) <= 1e-5 * scale);
      }
    }
  }
}

TEST_CASE("kl regularization pulls a drifted row back to the reference") {
  TrainerConfig cfg;
  cfg.kl_coeff = 1.0;
  ToyPolicy policy = one_question_policy();
  policy.freeze_reference();
  auto& l = policy.mutable_logits(0);
  l[4] = 2.0;  // drift

  // guarded group: advantages are all zero, so only the KL term acts
  const GroupRollout r = manual_rollout(policy, {4, 4, 4, 4},
                                        {0.9, 0.9, 0.9, 0.9}, cfg);
  const auto kl_of = [&] {
    const auto p = policy.probabilities(0, cfg.sampling_temperature);
    const auto q = ToyPolicy({"q0"}).probabilities(0, cfg.sampling_temperature);
    double kl = 0.0;
    for (std::size_t m = 0; m < p.size(); ++m) {
      if (p[m] > 0.0) kl += p[m] * std::log(p[m] / q[m]);
    }
    return kl;
  };
  const double before = kl_of();
  policy_update(policy, {r}, cfg);
  CHECK(kl_of() < before);
}

TEST_CASE("ratio clipping silences far-off-policy samples") {
  TrainerConfig cfg;
  cfg.clip_eps = 0.2;
  ToyPolicy policy = one_question_policy();
  const double t = cfg.sampling_temperature;
  const double pi = 1.0 / 21.0;  // uniform logits

  GroupRollout fresh = manual_rollout(policy, {3, 7}, {1.0, 0.0}, cfg);
  const auto grad_on = policy_gradient(policy, {fresh}, cfg);
  // on-policy: +1 at 3 contributes (1-pi)/T there, -1 at 7 adds pi/T back
  CHECK(grad_on[0][3] == doctest::Approx(1.0 / t).epsilon(1e-12));
  CHECK(grad_on[0][7] == doctest::Approx(-1.0 / t).epsilon(1e-12));

  // pretend the behavior policy found index 3 much less likely than now:
  // ratio e > 1.2 with a > 0 -> that sample's term is clipped away
  GroupRollout off = fresh;
  off.behavior_log_probs[0] -= 1.0;
  const auto grad_off = policy_gradient(policy, {off}, cfg);
  CHECK(grad_off[0][3] == doctest::Approx(pi / t).epsilon(1e-12));
  CHECK(grad_off[0][3] < grad_on[0][3]);

  // silence the negative sample too: ratio e^-1 < 0.8 with a < 0
  off.behavior_log_probs[1] += 1.0;
  const auto grad_none = policy_gradient(policy, {off}, cfg);
  for (double v : grad_none[0]) CHECK(v == 0.0);
}

TEST_CASE("train is deterministic per seed and sensitive to it") {
  std::vector<QuestionTarget> targets = {{"q0", 0.25, 0}, {"q1", 0.7, 1}};
  TrainerConfig cfg;
  cfg.steps = 40;
  cfg.batch_size = 4;
  cfg.seed = 99;
  const auto [p1, r1] = train(targets, RewardKind::entropy, cfg);
  const auto [p2, r2] = train(targets, RewardKind::entropy, cfg);
  REQUIRE(r1.mean_reward_curve.size() == r2.mean_reward_curve.size());
  for (std::size_t s = 0; s < r1.mean_reward_curve.size(); ++s) {
    CHECK(r1.mean_reward_curve[s] == r2.mean_reward_curve[s]);
    CHECK(r1.mean_abs_gap_curve[s] == r2.mean_abs_gap_curve[s]);
  }
  CHECK(r1.final_mean_abs_gap == r2.final_mean_abs_gap);
  for (std::size_t q = 0; q < targets.size(); ++q) {
    CHECK(p1.logits(q) == p2.logits(q));
  }

  cfg.seed = 100;
  const auto [p3, r3] = train(targets, RewardKind::entropy, cfg);
  CHECK(r3.mean_reward_curve != r1.mean_reward_curve);
}

TEST_CASE("train with zero steps reports an empty curve") {
  TrainerConfig cfg;
  cfg.steps = 0;
  const auto [policy, report] =
      train({{"q0", 0.4, 0}}, RewardKind::entropy, cfg);
  CHECK(report.mean_reward_curve.empty());
  CHECK(report.mean_abs_gap_curve.empty());
  for (double v : policy.logits(0)) CHECK(v == 0.0);
  CHECK(report.format_failures == 0);
}

TEST_CASE("one-question entropy training converges onto the band") {
  TrainerConfig cfg;
  cfg.steps = 500;
  cfg.seed = 7;
  const auto [policy, report] =
      train({{"only", 0.3, 0}}, RewardKind::entropy, cfg);
  CHECK(report.final_mean_reward >= 0.90);
  CHECK(std::fabs(policy.expected_uncertainty(0, cfg.sampling_temperature) -
                  0.3) <= 0.05);
}

TEST_CASE("brier training drives an always-wrong question toward u = 1") {
  TrainerConfig cfg;
  cfg.steps = 1000;
  cfg.seed = 7;
  const auto [policy, report] = train({{"only", 0.0, 1}}, RewardKind::brier,
                                      cfg);
  CHECK(std::fabs(policy.expected_uncertainty(0, cfg.sampling_temperature) -
                  1.0) <= 0.05);
}

TEST_CASE("report serialization matches the curve") {
  TrainerConfig cfg;
  cfg.steps = 3;
  cfg.batch_size = 2;
  const auto [policy, report] = train({{"q0", 0.5, 0}}, RewardKind::entropy,
                                      cfg);
  const std::string csv = reward_curve_to_csv(report);
  CHECK(csv.rfind("step,mean_reward,mean_abs_gap\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  const std::string json = training_report_to_json(report);
  CHECK(json.find("\"steps\": 3") != std::string::npos);
  CHECK(json.find("mean_reward_curve") != std::string::npos);
}

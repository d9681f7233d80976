// uqcal_main.cpp — command-line front end for the uncertainty pipeline.
//
// Subcommands: score, calibrate, evaluate, train-sim, pipeline. Every run
// reads an optional JSON config file, applies flag overrides, executes, and
// leaves its outputs plus a manifest in a fresh run directory.
//
// Exit codes: 0 success, 2 config error, 3 data/alignment error,
// 4 provider error, 5 numerical/training error.

#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "uqcal/error.hpp"
#include "uqcal/pipeline.hpp"
#include "uqcal/version.hpp"

namespace {

int exit_code_for(uqcal::errc code) {
  using uqcal::errc;
  switch (code) {
    case errc::config_error:
    case errc::template_error:
      return 2;
    case errc::invalid_input:
    case errc::insufficient_data:
    case errc::inseparable_data:
    case errc::empty_input:
    case errc::parse_error:
    case errc::duplicate_id:
    case errc::alignment_error:
    case errc::missing_policy_row:
    case errc::io_error:
      return 3;
    case errc::provider_error:
    case errc::fixture_incomplete:
      return 4;
    case errc::degenerate_embedding:
    case errc::degenerate_kernel:
    case errc::not_psd:
    case errc::undefined_metric:
    case errc::training_divergence:
      return 5;
  }
  return 1;
}

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> provider_mode;
  std::optional<std::string> reward;
  std::optional<int> bins;
  std::optional<std::string> dataset;
  std::optional<std::string> embeddings;
  std::optional<std::string> predictions;
  std::optional<std::string> fixture_dir;
  std::optional<int> steps;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path,
                  "JSON run-config file (flags override its values)");
  cmd->add_option("--seed", flags.seed, "Master seed");
  cmd->add_option("--out", flags.out_dir, "Output root for run directories");
  cmd->add_option("--provider", flags.provider_mode, "Provider mode")
      ->check(CLI::IsMember({"fixture", "live"}));
  cmd->add_option("--reward", flags.reward, "Reward kind for training")
      ->check(CLI::IsMember({"entropy", "brier"}));
  cmd->add_option("--bins", flags.bins, "Reliability bins for ECE");
  cmd->add_option("--dataset", flags.dataset, "dataset.jsonl path");
  cmd->add_option("--embeddings", flags.embeddings, "embeddings.jsonl path");
  cmd->add_option("--predictions", flags.predictions,
                  "predictions.jsonl path");
  cmd->add_option("--fixture-dir", flags.fixture_dir,
                  "Fixture directory for the offline provider");
  cmd->add_option("--steps", flags.steps, "Trainer steps override");
}

uqcal::RunConfig resolve_config(const CommonFlags& flags) {
  uqcal::RunConfig config = flags.config_path.empty()
                                ? uqcal::default_run_config()
                                : uqcal::load_run_config(flags.config_path);
  if (flags.seed) config.seed = *flags.seed;
  if (flags.out_dir) config.out_dir = *flags.out_dir;
  if (flags.provider_mode) {
    config.provider.mode = uqcal::provider_mode_from_name(*flags.provider_mode);
  }
  if (flags.reward) config.reward = uqcal::reward_kind_from_name(*flags.reward);
  if (flags.bins) config.metrics.bins = *flags.bins;
  if (flags.dataset) config.dataset_path = *flags.dataset;
  if (flags.embeddings) config.embeddings_path = *flags.embeddings;
  if (flags.predictions) config.predictions_path = *flags.predictions;
  if (flags.fixture_dir) config.provider.fixture_dir = *flags.fixture_dir;
  if (flags.steps) config.trainer.steps = *flags.steps;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entropy-scored, Platt-calibrated, GRPO-trained uncertainty "
               "pipeline"};
  app.set_version_flag("--version", std::string(uqcal::kVersion));
  app.require_subcommand(1);

  CommonFlags flags;
  std::string active;

  for (const char* name : {"score", "calibrate", "evaluate", "train-sim",
                           "pipeline"}) {
    CLI::App* cmd = app.add_subcommand(name);
    add_common_flags(cmd, flags);
    cmd->callback([&active, name] { active = name; });
  }
  app.get_subcommand("score")->description(
      "Fill entropy_score from an embeddings file");
  app.get_subcommand("calibrate")->description(
      "Fit Platt scaling on a seeded held-out split and fill u_cal");
  app.get_subcommand("evaluate")->description(
      "Compute ECE / AUROC / Spearman for a predictions file");
  app.get_subcommand("train-sim")->description(
      "Run the desk-scale GRPO trainer against the configured reward");
  app.get_subcommand("pipeline")->description(
      "score -> calibrate -> train-sim -> evaluate in one run directory");

  CLI11_PARSE(app, argc, argv);

  try {
    const uqcal::RunConfig config = resolve_config(flags);
    if (active == "score") {
      const auto outcome = uqcal::cmd_score(config);
      std::printf("scored %zu records -> %s\n", outcome.records,
                  outcome.run_dir.c_str());
    } else if (active == "calibrate") {
      const auto outcome = uqcal::cmd_calibrate(config);
      std::printf("fitted A=%.6f B=%.6f (converged=%s) -> %s\n",
                  outcome.model.slope_a, outcome.model.intercept_b,
                  outcome.model.fit_meta.converged ? "true" : "false",
                  outcome.run_dir.c_str());
    } else if (active == "evaluate") {
      const auto outcome = uqcal::cmd_evaluate(config);
      if (outcome.report.auroc_value) {
        std::printf("ece=%.6f auroc=%.6f n=%zu -> %s\n",
                    outcome.report.ece_value, *outcome.report.auroc_value,
                    outcome.report.n, outcome.run_dir.c_str());
      } else {
        std::printf("ece=%.6f auroc=undefined n=%zu -> %s\n",
                    outcome.report.ece_value, outcome.report.n,
                    outcome.run_dir.c_str());
      }
    } else if (active == "train-sim") {
      const auto outcome = uqcal::cmd_train_sim(config);
      std::printf("trained %zu steps, final reward %.4f, gap %.4f -> %s\n",
                  outcome.report.mean_reward_curve.size(),
                  outcome.report.final_mean_reward,
                  outcome.report.final_mean_abs_gap, outcome.run_dir.c_str());
    } else if (active == "pipeline") {
      const auto outcome = uqcal::cmd_pipeline(config);
      if (outcome.metrics.auroc_value) {
        std::printf(
            "pipeline done: A=%.4f reward=%.4f ece=%.4f auroc=%.4f -> %s\n",
            outcome.model.slope_a, outcome.training.final_mean_reward,
            outcome.metrics.ece_value, *outcome.metrics.auroc_value,
            outcome.run_dir.c_str());
      } else {
        std::printf("pipeline done: A=%.4f reward=%.4f ece=%.4f -> %s\n",
                    outcome.model.slope_a, outcome.training.final_mean_reward,
                    outcome.metrics.ece_value, outcome.run_dir.c_str());
      }
    }
  } catch (const uqcal::Error& e) {
    std::fprintf(stderr, "error (%s): %s\n", uqcal::errc_name(e.code()),
                 e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

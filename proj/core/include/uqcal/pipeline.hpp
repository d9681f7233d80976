// pipeline.hpp — run configuration, stage logic, and the command entry
// points the CLI wraps.
//
// Stages exchange line-delimited JSON so any stage output can be replaced by
// user-supplied data. Every command writes its outputs plus a manifest into
// a fresh numbered run directory (run-0001, run-0002, ...) under the
// configured output root; nothing is overwritten. Given identical inputs,
// config, and seed, stage outputs are byte-identical in fixture mode.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uqcal/calibration.hpp"
#include "uqcal/dataio.hpp"
#include "uqcal/entropy.hpp"
#include "uqcal/grpo.hpp"
#include "uqcal/metrics.hpp"
#include "uqcal/provider.hpp"
#include "uqcal/rewards.hpp"

namespace uqcal {

struct CalibrationSection {
  // Fraction of records held out (seeded split) to fit the Platt map.
  double split_fraction = 0.2;
  bool label_smoothing = false;
};

struct MetricsSection {
  int bins = 10;
};

struct SamplingSection {
  // Paper-sourced defaults: entropy sampling at t=1.0, standard answers at
  // t=0.1; K is an artifact decision.
  int samples_per_question = 10;
  double entropy_temperature = 1.0;
  double standard_answer_temperature = 0.1;
};

// Recorded for provenance only; the desk-scale trainer never applies LoRA.
struct LoraProvenance {
  int rank = 16;
  double alpha = 32.0;
  double dropout = 0.05;
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::string out_dir = "runs";
  std::string dataset_path;
  std::string embeddings_path;
  std::string predictions_path;

  KernelConfig kernel;
  CalibrationSection calibration;
  MetricsSection metrics;
  RewardKind reward = RewardKind::entropy;
  TrainerConfig trainer;
  SamplingSection sampling;
  LoraProvenance lora;
  ProviderConfig provider;
};

RunConfig default_run_config();
// Strict parse: unknown keys are config errors.
RunConfig load_run_config(const std::string& path);
RunConfig run_config_from_json_text(const std::string& text,
                                    const std::string& origin);
std::string run_config_to_json(const RunConfig& config);

// Next run-#### directory under out_dir (created, never reused).
std::string create_run_dir(const std::string& out_dir);

// ---------------------------------------------------------------------------
// Stage logic, file-free; the cmd_* wrappers add I/O and manifests.
// ---------------------------------------------------------------------------

// Fill entropy_score for every record from its aligned embeddings.
// Records lacking an embedding row raise alignment-error listing the ids.
std::vector<QARecord> stage_score(std::vector<QARecord> records,
                                  const std::vector<EmbeddingRecord>& embeddings,
                                  const KernelConfig& kernel);

struct CalibrateStageResult {
  CalibrationModel model;
  std::vector<QARecord> records;  // u_cal filled for every record
  std::size_t holdout_size = 0;
};

// Seeded split, Platt fit on the held-out records, u_cal for all.
CalibrateStageResult stage_calibrate(std::vector<QARecord> records,
                                     const CalibrationSection& section,
                                     std::uint64_t seed);

struct TrainStageResult {
  TrainingReport report;
  std::vector<Prediction> predictions;  // E_pi[u] per question
};

TrainStageResult stage_train(const std::vector<QARecord>& records,
                             RewardKind reward, TrainerConfig trainer,
                             std::uint64_t seed);

MetricsReport stage_evaluate(const std::vector<QARecord>& records,
                             const std::vector<Prediction>& predictions,
                             int bins);

// Fill null incorrect labels through the provider's judge.
std::vector<QARecord> judge_missing_labels(std::vector<QARecord> records,
                                           Provider& provider);

// ---------------------------------------------------------------------------
// Commands.
// ---------------------------------------------------------------------------

struct ScoreOutcome {
  std::string run_dir;
  std::size_t records = 0;
};

struct CalibrateOutcome {
  std::string run_dir;
  CalibrationModel model;
};

struct TrainSimOutcome {
  std::string run_dir;
  TrainingReport report;
};

struct EvaluateOutcome {
  std::string run_dir;
  MetricsReport report;
};

struct PipelineOutcome {
  std::string run_dir;
  CalibrationModel model;
  TrainingReport training;
  MetricsReport metrics;
};

ScoreOutcome cmd_score(const RunConfig& config);
CalibrateOutcome cmd_calibrate(const RunConfig& config);
TrainSimOutcome cmd_train_sim(const RunConfig& config);
EvaluateOutcome cmd_evaluate(const RunConfig& config);
// score -> calibrate -> train-sim -> evaluate, one run dir, one manifest.
// A failing stage aborts; partial outputs stay on disk and the manifest
// records the failure.
PipelineOutcome cmd_pipeline(const RunConfig& config);

}  // namespace uqcal

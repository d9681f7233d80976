#include "uqcal/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "uqcal/digest.hpp"
#include "uqcal/error.hpp"
#include "uqcal/rng.hpp"
#include "uqcal/version.hpp"

namespace uqcal {
namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

// --------------------------------------------------------------------------
// config (de)serialization
// --------------------------------------------------------------------------

void reject_unknown_keys(const ordered_json& j, const char* section,
                         std::initializer_list<const char*> known) {
  for (const auto& item : j.items()) {
    bool found = false;
    for (const char* k : known) {
      if (item.key() == k) {
        found = true;
        break;
      }
    }
    if (!found) {
      raise(errc::config_error, std::string("unknown config key '") +
                                    item.key() + "' in " + section);
    }
  }
}

template <typename T>
void read_field(const ordered_json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    raise(errc::config_error,
          std::string("bad value for config key '") + key + "': " + e.what());
  }
}

}  // namespace

RunConfig default_run_config() { return RunConfig{}; }

RunConfig run_config_from_json_text(const std::string& text,
                                    const std::string& origin) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    raise(errc::config_error, origin + ": " + e.what());
  }
  if (!j.is_object()) raise(errc::config_error, origin + ": not a JSON object");

  RunConfig c;
  reject_unknown_keys(j, "config root",
                      {"seed", "out_dir", "dataset", "embeddings",
                       "predictions", "kernel", "calibration", "metrics",
                       "reward", "trainer", "sampling", "lora_provenance",
                       "provider"});

  read_field(j, "seed", c.seed);
  read_field(j, "out_dir", c.out_dir);
  read_field(j, "dataset", c.dataset_path);
  read_field(j, "embeddings", c.embeddings_path);
  read_field(j, "predictions", c.predictions_path);

  if (j.contains("kernel")) {
    const ordered_json& k = j.at("kernel");
    reject_unknown_keys(k, "kernel", {"kind", "bandwidth"});
    std::string kind = kernel_kind_name(c.kernel.kind);
    read_field(k, "kind", kind);
    c.kernel.kind = kernel_kind_from_name(kind);
    read_field(k, "bandwidth", c.kernel.bandwidth);
  }
  if (j.contains("calibration")) {
    const ordered_json& k = j.at("calibration");
    reject_unknown_keys(k, "calibration",
                        {"split_fraction", "label_smoothing"});
    read_field(k, "split_fraction", c.calibration.split_fraction);
    read_field(k, "label_smoothing", c.calibration.label_smoothing);
  }
  if (j.contains("metrics")) {
    const ordered_json& k = j.at("metrics");
    reject_unknown_keys(k, "metrics", {"bins"});
    read_field(k, "bins", c.metrics.bins);
  }
  if (j.contains("reward")) {
    std::string kind;
    read_field(j, "reward", kind);
    c.reward = reward_kind_from_name(kind);
  }
  if (j.contains("trainer")) {
    const ordered_json& k = j.at("trainer");
    reject_unknown_keys(
        k, "trainer",
        {"group_size", "batch_size", "steps", "sampling_temperature",
         "learning_rate", "std_guard_eps", "kl_coeff", "clip_eps",
         "update_epochs", "grid_levels"});
    read_field(k, "group_size", c.trainer.group_size);
    read_field(k, "batch_size", c.trainer.batch_size);
    read_field(k, "steps", c.trainer.steps);
    read_field(k, "sampling_temperature", c.trainer.sampling_temperature);
    read_field(k, "learning_rate", c.trainer.learning_rate);
    read_field(k, "std_guard_eps", c.trainer.std_guard_eps);
    read_field(k, "kl_coeff", c.trainer.kl_coeff);
    read_field(k, "clip_eps", c.trainer.clip_eps);
    read_field(k, "update_epochs", c.trainer.update_epochs);
    read_field(k, "grid_levels", c.trainer.grid_levels);
  }
  if (j.contains("sampling")) {
    const ordered_json& k = j.at("sampling");
    reject_unknown_keys(k, "sampling",
                        {"samples_per_question", "entropy_temperature",
                         "standard_answer_temperature"});
    read_field(k, "samples_per_question", c.sampling.samples_per_question);
    read_field(k, "entropy_temperature", c.sampling.entropy_temperature);
    read_field(k, "standard_answer_temperature",
               c.sampling.standard_answer_temperature);
  }
  if (j.contains("lora_provenance")) {
    const ordered_json& k = j.at("lora_provenance");
    reject_unknown_keys(k, "lora_provenance", {"rank", "alpha", "dropout"});
    read_field(k, "rank", c.lora.rank);
    read_field(k, "alpha", c.lora.alpha);
    read_field(k, "dropout", c.lora.dropout);
  }
  if (j.contains("provider")) {
    const ordered_json& k = j.at("provider");
    reject_unknown_keys(
        k, "provider",
        {"mode", "fixture_dir", "endpoint", "auth_token_env",
         "generator_model", "embedder_model", "judge_model", "timeout_seconds",
         "max_retries", "max_concurrent_requests",
         "retry_base_delay_seconds"});
    std::string mode = provider_mode_name(c.provider.mode);
    read_field(k, "mode", mode);
    c.provider.mode = provider_mode_from_name(mode);
    read_field(k, "fixture_dir", c.provider.fixture_dir);
    read_field(k, "endpoint", c.provider.endpoint);
    read_field(k, "auth_token_env", c.provider.auth_token_env);
    read_field(k, "generator_model", c.provider.generator_model);
    read_field(k, "embedder_model", c.provider.embedder_model);
    read_field(k, "judge_model", c.provider.judge_model);
    read_field(k, "timeout_seconds", c.provider.timeout_seconds);
    read_field(k, "max_retries", c.provider.max_retries);
    read_field(k, "max_concurrent_requests",
               c.provider.max_concurrent_requests);
    read_field(k, "retry_base_delay_seconds",
               c.provider.retry_base_delay_seconds);
  }
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(errc::config_error, "cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return run_config_from_json_text(buf.str(), path);
}

namespace {

ordered_json run_config_json(const RunConfig& c) {
  ordered_json j;
  j["seed"] = c.seed;
  j["out_dir"] = c.out_dir;
  j["dataset"] = c.dataset_path;
  j["embeddings"] = c.embeddings_path;
  j["predictions"] = c.predictions_path;
  j["kernel"] = {{"kind", kernel_kind_name(c.kernel.kind)},
                 {"bandwidth", c.kernel.bandwidth}};
  j["calibration"] = {{"split_fraction", c.calibration.split_fraction},
                      {"label_smoothing", c.calibration.label_smoothing}};
  j["metrics"] = {{"bins", c.metrics.bins}};
  j["reward"] = reward_kind_name(c.reward);
  j["trainer"] = {{"group_size", c.trainer.group_size},
                  {"batch_size", c.trainer.batch_size},
                  {"steps", c.trainer.steps},
                  {"sampling_temperature", c.trainer.sampling_temperature},
                  {"learning_rate", c.trainer.learning_rate},
                  {"std_guard_eps", c.trainer.std_guard_eps},
                  {"kl_coeff", c.trainer.kl_coeff},
                  {"clip_eps", c.trainer.clip_eps},
                  {"update_epochs", c.trainer.update_epochs},
                  {"grid_levels", c.trainer.grid_levels}};
  j["sampling"] = {
      {"samples_per_question", c.sampling.samples_per_question},
      {"entropy_temperature", c.sampling.entropy_temperature},
      {"standard_answer_temperature", c.sampling.standard_answer_temperature}};
  j["lora_provenance"] = {{"rank", c.lora.rank},
                          {"alpha", c.lora.alpha},
                          {"dropout", c.lora.dropout}};
  j["provider"] = {
      {"mode", provider_mode_name(c.provider.mode)},
      {"fixture_dir", c.provider.fixture_dir},
      {"endpoint", c.provider.endpoint},
      {"auth_token_env", c.provider.auth_token_env},
      {"generator_model", c.provider.generator_model},
      {"embedder_model", c.provider.embedder_model},
      {"judge_model", c.provider.judge_model},
      {"timeout_seconds", c.provider.timeout_seconds},
      {"max_retries", c.provider.max_retries},
      {"max_concurrent_requests", c.provider.max_concurrent_requests},
      {"retry_base_delay_seconds", c.provider.retry_base_delay_seconds}};
  return j;
}

}  // namespace

std::string run_config_to_json(const RunConfig& config) {
  return run_config_json(config).dump(2) + "\n";
}

std::string create_run_dir(const std::string& out_dir) {
  fs::create_directories(out_dir);
  int next = 1;
  for (const auto& entry : fs::directory_iterator(out_dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("run-", 0) == 0) {
      const int num = std::atoi(name.c_str() + 4);
      next = std::max(next, num + 1);
    }
  }
  for (;; ++next) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "run-%04d", next);
    const fs::path dir = fs::path(out_dir) / buf;
    std::error_code ec;
    if (fs::create_directory(dir, ec)) return dir.string();
    if (ec) raise(errc::io_error, "cannot create run dir: " + dir.string());
  }
}

// --------------------------------------------------------------------------
// stage logic
// --------------------------------------------------------------------------

std::vector<QARecord> stage_score(std::vector<QARecord> records,
                                  const std::vector<EmbeddingRecord>& embeddings,
                                  const KernelConfig& kernel) {
  std::unordered_map<std::string, const EmbeddingRecord*> by_id;
  for (const EmbeddingRecord& e : embeddings) by_id.emplace(e.record_id, &e);

  std::vector<std::string> missing;
  for (const QARecord& r : records) {
    if (by_id.find(r.id) == by_id.end()) missing.push_back(r.id);
  }
  if (!missing.empty()) {
    std::ostringstream msg;
    msg << "dataset ids without embeddings:";
    for (const std::string& id : missing) msg << ' ' << id;
    raise(errc::alignment_error, msg.str());
  }

  for (QARecord& r : records) {
    const EmbeddingRecord& emb = *by_id.at(r.id);
    SampleSet set;
    set.record_id = r.id;
    set.embeddings = EmbeddingSet::from_rows(emb.vectors);
    r.entropy_score = score_sample_set(set, kernel).score.value;
  }
  return records;
}

CalibrateStageResult stage_calibrate(std::vector<QARecord> records,
                                     const CalibrationSection& section,
                                     std::uint64_t seed) {
  if (!(section.split_fraction > 0.0) || section.split_fraction > 1.0) {
    raise(errc::config_error,
          "calibration split_fraction must lie in (0, 1]; got " +
              std::to_string(section.split_fraction));
  }
  std::vector<std::string> unscored;
  for (const QARecord& r : records) {
    if (!r.entropy_score || !r.incorrect) unscored.push_back(r.id);
  }
  if (!unscored.empty()) {
    std::ostringstream msg;
    msg << "records missing entropy_score or incorrect label:";
    for (const std::string& id : unscored) msg << ' ' << id;
    raise(errc::invalid_input, msg.str());
  }
  if (records.empty()) {
    raise(errc::empty_input, "cannot calibrate an empty dataset");
  }

  // Seeded Fisher-Yates, then the leading fraction becomes the held-out
  // calibration set.
  std::vector<std::size_t> order(records.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(derive_seed(seed, "calibrate-split"));
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::size_t k = static_cast<std::size_t>(rng.below(i));
    std::swap(order[i - 1], order[k]);
  }
  const auto holdout = static_cast<std::size_t>(
      std::ceil(section.split_fraction * static_cast<double>(records.size())));

  std::vector<CalibrationPoint> points;
  points.reserve(holdout);
  for (std::size_t i = 0; i < holdout; ++i) {
    const QARecord& r = records[order[i]];
    points.push_back(CalibrationPoint{*r.entropy_score, *r.incorrect});
  }

  PlattFitConfig fit;
  fit.label_smoothing = section.label_smoothing;
  CalibrateStageResult result;
  result.model = fit_platt(CalibrationDataset::from_points(std::move(points)),
                           fit);
  result.holdout_size = holdout;

  for (QARecord& r : records) {
    r.u_cal = apply(result.model, *r.entropy_score).value;
  }
  result.records = std::move(records);
  return result;
}

TrainStageResult stage_train(const std::vector<QARecord>& records,
                             RewardKind reward, TrainerConfig trainer,
                             std::uint64_t seed) {
  if (records.empty()) raise(errc::empty_input, "cannot train on 0 questions");
  std::vector<QuestionTarget> targets;
  targets.reserve(records.size());
  for (const QARecord& r : records) {
    QuestionTarget t;
    t.id = r.id;
    if (reward == RewardKind::entropy) {
      if (!r.u_cal) {
        raise(errc::config_error,
              "entropy reward needs u_cal for every record; missing for " +
                  r.id);
      }
      t.u_cal = *r.u_cal;
    } else {
      if (!r.incorrect) {
        raise(errc::config_error,
              "brier reward needs incorrect labels; missing for " + r.id);
      }
      t.incorrect = *r.incorrect;
    }
    targets.push_back(std::move(t));
  }

  trainer.seed = derive_seed(seed, "train-sim");
  auto [policy, report] = train(targets, reward, trainer);

  TrainStageResult result;
  result.report = std::move(report);
  result.predictions.reserve(targets.size());
  for (std::size_t q = 0; q < targets.size(); ++q) {
    result.predictions.push_back(Prediction{
        targets[q].id,
        policy.expected_uncertainty(q, trainer.sampling_temperature)});
  }
  return result;
}

MetricsReport stage_evaluate(const std::vector<QARecord>& records,
                             const std::vector<Prediction>& predictions,
                             int bins) {
  if (records.empty()) raise(errc::empty_input, "cannot evaluate 0 records");
  std::unordered_map<std::string, double> by_id;
  for (const Prediction& p : predictions) by_id.emplace(p.id, p.u);

  std::vector<std::string> missing;
  for (const QARecord& r : records) {
    if (by_id.find(r.id) == by_id.end()) missing.push_back(r.id);
  }
  if (!missing.empty()) {
    std::ostringstream msg;
    msg << "dataset ids without predictions:";
    for (const std::string& id : missing) msg << ' ' << id;
    raise(errc::alignment_error, msg.str());
  }

  std::vector<double> u;
  std::vector<int> z;
  std::vector<double> targets;
  bool all_have_ucal = true;
  for (const QARecord& r : records) {
    if (!r.incorrect) {
      raise(errc::invalid_input,
            "record " + r.id + " lacks an incorrect label");
    }
    u.push_back(by_id.at(r.id));
    z.push_back(*r.incorrect);
    if (r.u_cal) {
      targets.push_back(*r.u_cal);
    } else {
      all_have_ucal = false;
    }
  }
  if (!all_have_ucal) targets.clear();

  return evaluate_batch(
      EvaluationBatch::make(std::move(u), std::move(z), std::move(targets)),
      bins);
}

std::vector<QARecord> judge_missing_labels(std::vector<QARecord> records,
                                           Provider& provider) {
  for (QARecord& r : records) {
    if (r.incorrect) continue;
    const std::string verdict =
        provider.judge(r.question, r.gold_answer, r.standard_answer);
    const Judgment parsed = parse_judgment(verdict);
    if (!parsed.ok) {
      raise(errc::provider_error,
            "judge verdict for record " + r.id + " is unparseable: \"" +
                verdict + "\"");
    }
    r.incorrect = parsed.incorrect;
  }
  return records;
}

// --------------------------------------------------------------------------
// manifests and commands
// --------------------------------------------------------------------------

namespace {

class ManifestBuilder {
 public:
  ManifestBuilder(const std::string& command, const RunConfig& config) {
    j_["tool"] = kToolName;
    j_["version"] = kVersion;
    j_["command"] = command;
    j_["status"] = "ok";
    j_["config"] = run_config_json(config);
    j_["inputs"] = ordered_json::array();
    j_["outputs"] = ordered_json::array();
    j_["stages"] = ordered_json::array();
    started_ = std::chrono::steady_clock::now();
    j_["timing"] = ordered_json::object();
    j_["timing"]["started_at_unix_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::system_clock::now().time_since_epoch())
            .count();
    j_["timing"]["stages"] = ordered_json::object();
  }

  void add_input(const std::string& role, const std::string& path) {
    j_["inputs"].push_back({{"role", role},
                            {"path", path},
                            {"sha256", sha256_file_hex(path)}});
  }

  void add_output(const std::string& role, const std::string& filename) {
    j_["outputs"].push_back({{"role", role}, {"file", filename}});
  }

  // Times the stage body; marks the manifest failed and rethrows on error.
  template <typename Body>
  void stage(const std::string& name, Body&& body) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      body();
    } catch (const std::exception& e) {
      j_["status"] = "failed";
      j_["failed_stage"] = name;
      j_["error"] = e.what();
      throw;
    }
    j_["stages"].push_back(name);
    j_["timing"]["stages"][name] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
  }

  void set(const std::string& key, ordered_json value) {
    j_[key] = std::move(value);
  }

  void write(const std::string& run_dir) {
    j_["timing"]["total_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      started_)
            .count();
    std::ofstream out(run_dir + "/manifest.json", std::ios::trunc);
    if (!out) raise(errc::io_error, "cannot write manifest in " + run_dir);
    out << j_.dump(2) << "\n";
  }

 private:
  ordered_json j_;
  std::chrono::steady_clock::time_point started_;
};

// Manifest must land on disk whether the command succeeds or throws.
struct ManifestFlusher {
  ManifestBuilder& builder;
  const std::string& run_dir;
  ~ManifestFlusher() {
    try {
      builder.write(run_dir);
    } catch (...) {
      // Nothing sensible left to do during unwinding.
    }
  }
};

ordered_json calibration_model_json(const CalibrationModel& m) {
  return ordered_json{{"A", m.slope_a},
                      {"B", m.intercept_b},
                      {"fit_meta",
                       {{"iterations", m.fit_meta.iterations},
                        {"final_nll", m.fit_meta.final_nll},
                        {"converged", m.fit_meta.converged}}}};
}

ordered_json metrics_json_object(const MetricsReport& report) {
  return ordered_json::parse(metrics_to_json(report));
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) raise(errc::io_error, "cannot write " + path);
  out << text;
}

void require_path(const std::string& path, const char* what) {
  if (path.empty()) {
    raise(errc::config_error, std::string("missing required ") + what);
  }
}

void write_metrics_outputs(const std::string& run_dir,
                           const MetricsReport& report,
                           ManifestBuilder& manifest) {
  write_text(run_dir + "/metrics.json", metrics_to_json(report));
  write_text(run_dir + "/metrics.txt", metrics_to_table(report));
  write_text(run_dir + "/reliability.csv", reliability_to_csv(report.bins));
  manifest.add_output("metrics_json", "metrics.json");
  manifest.add_output("metrics_table", "metrics.txt");
  manifest.add_output("reliability_csv", "reliability.csv");
  manifest.set("metrics", metrics_json_object(report));
}

void write_training_outputs(const std::string& run_dir,
                            const TrainStageResult& result,
                            ManifestBuilder& manifest) {
  write_text(run_dir + "/training_report.json",
             training_report_to_json(result.report));
  write_text(run_dir + "/reward_curve.csv", reward_curve_to_csv(result.report));
  save_predictions(run_dir + "/predictions.jsonl", result.predictions);
  manifest.add_output("training_report", "training_report.json");
  manifest.add_output("reward_curve", "reward_curve.csv");
  manifest.add_output("predictions", "predictions.jsonl");
  manifest.set("training",
               ordered_json{
                   {"steps", result.report.mean_reward_curve.size()},
                   {"final_mean_reward", result.report.final_mean_reward},
                   {"final_mean_abs_gap", result.report.final_mean_abs_gap},
                   {"format_failures", result.report.format_failures}});
}

}  // namespace

ScoreOutcome cmd_score(const RunConfig& config) {
  require_path(config.dataset_path, "dataset path");
  require_path(config.embeddings_path, "embeddings path");
  const std::string run_dir = create_run_dir(config.out_dir);
  ManifestBuilder manifest("score", config);
  ManifestFlusher flusher{manifest, run_dir};

  manifest.add_input("dataset", config.dataset_path);
  manifest.add_input("embeddings", config.embeddings_path);

  std::vector<QARecord> scored;
  manifest.stage("score", [&] {
    scored = stage_score(load_dataset(config.dataset_path),
                         load_embeddings(config.embeddings_path),
                         config.kernel);
    save_dataset(run_dir + "/scored.jsonl", scored);
  });
  manifest.add_output("scored_dataset", "scored.jsonl");
  return ScoreOutcome{run_dir, scored.size()};
}

CalibrateOutcome cmd_calibrate(const RunConfig& config) {
  require_path(config.dataset_path, "dataset path");
  const std::string run_dir = create_run_dir(config.out_dir);
  ManifestBuilder manifest("calibrate", config);
  ManifestFlusher flusher{manifest, run_dir};

  manifest.add_input("dataset", config.dataset_path);

  CalibrateStageResult result;
  manifest.stage("calibrate", [&] {
    result = stage_calibrate(load_dataset(config.dataset_path),
                             config.calibration, config.seed);
    save_dataset(run_dir + "/calibrated.jsonl", result.records);
    write_text(run_dir + "/calibration.json",
               calibration_model_json(result.model).dump(2) + "\n");
  });
  manifest.add_output("calibrated_dataset", "calibrated.jsonl");
  manifest.add_output("calibration_model", "calibration.json");
  manifest.set("calibration_model", calibration_model_json(result.model));
  manifest.set("calibration_holdout_size",
               static_cast<std::uint64_t>(result.holdout_size));
  return CalibrateOutcome{run_dir, result.model};
}

TrainSimOutcome cmd_train_sim(const RunConfig& config) {
  require_path(config.dataset_path, "dataset path");
  const std::string run_dir = create_run_dir(config.out_dir);
  ManifestBuilder manifest("train-sim", config);
  ManifestFlusher flusher{manifest, run_dir};

  manifest.add_input("dataset", config.dataset_path);

  TrainStageResult result;
  manifest.stage("train-sim", [&] {
    result = stage_train(load_dataset(config.dataset_path), config.reward,
                         config.trainer, config.seed);
    write_training_outputs(run_dir, result, manifest);
  });
  return TrainSimOutcome{run_dir, result.report};
}

EvaluateOutcome cmd_evaluate(const RunConfig& config) {
  require_path(config.dataset_path, "dataset path");
  require_path(config.predictions_path, "predictions path");
  const std::string run_dir = create_run_dir(config.out_dir);
  ManifestBuilder manifest("evaluate", config);
  ManifestFlusher flusher{manifest, run_dir};

  manifest.add_input("dataset", config.dataset_path);
  manifest.add_input("predictions", config.predictions_path);

  MetricsReport report;
  manifest.stage("evaluate", [&] {
    report = stage_evaluate(load_dataset(config.dataset_path),
                            load_predictions(config.predictions_path),
                            config.metrics.bins);
    write_metrics_outputs(run_dir, report, manifest);
  });
  return EvaluateOutcome{run_dir, report};
}

PipelineOutcome cmd_pipeline(const RunConfig& config) {
  require_path(config.dataset_path, "dataset path");
  require_path(config.embeddings_path, "embeddings path");
  config.provider.validate();

  const std::string run_dir = create_run_dir(config.out_dir);
  ManifestBuilder manifest("pipeline", config);
  ManifestFlusher flusher{manifest, run_dir};

  manifest.add_input("dataset", config.dataset_path);
  manifest.add_input("embeddings", config.embeddings_path);

  PipelineOutcome outcome;
  outcome.run_dir = run_dir;

  std::vector<QARecord> records;
  manifest.stage("score", [&] {
    records = load_dataset(config.dataset_path);
    // Records still lacking correctness labels are judged here so the
    // calibration stage sees a fully labeled dataset.
    const bool needs_judge =
        std::any_of(records.begin(), records.end(),
                    [](const QARecord& r) { return !r.incorrect; });
    if (needs_judge) {
      const auto provider = make_provider(config.provider);
      records = judge_missing_labels(std::move(records), *provider);
    }
    records = stage_score(std::move(records),
                          load_embeddings(config.embeddings_path),
                          config.kernel);
    save_dataset(run_dir + "/scored.jsonl", records);
  });
  manifest.add_output("scored_dataset", "scored.jsonl");

  manifest.stage("calibrate", [&] {
    CalibrateStageResult result =
        stage_calibrate(std::move(records), config.calibration, config.seed);
    outcome.model = result.model;
    records = std::move(result.records);
    save_dataset(run_dir + "/calibrated.jsonl", records);
    write_text(run_dir + "/calibration.json",
               calibration_model_json(result.model).dump(2) + "\n");
  });
  manifest.add_output("calibrated_dataset", "calibrated.jsonl");
  manifest.add_output("calibration_model", "calibration.json");
  manifest.set("calibration_model", calibration_model_json(outcome.model));

  TrainStageResult train_result;
  manifest.stage("train-sim", [&] {
    train_result =
        stage_train(records, config.reward, config.trainer, config.seed);
    write_training_outputs(run_dir, train_result, manifest);
  });
  outcome.training = train_result.report;

  manifest.stage("evaluate", [&] {
    outcome.metrics = stage_evaluate(records, train_result.predictions,
                                     config.metrics.bins);
    write_metrics_outputs(run_dir, outcome.metrics, manifest);
  });

  return outcome;
}

}  // namespace uqcal

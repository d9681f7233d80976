// dataio.hpp — dataset schemas, JSONL persistence, and model-output parsers.
//
// Files are line-delimited JSON, one record per line, UTF-8, stable field
// order; absent values are literal null. Parsers are total: malformed model
// output becomes a flag on the parsed value, never an aborted pipeline.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "uqcal/rewards.hpp"

namespace uqcal {

struct QARecord {
  std::string id;
  std::string question;
  std::string gold_answer;
  std::string standard_answer;          // generated at low temperature
  std::optional<int> incorrect;         // 1 = incorrect; null until judged
  std::optional<double> entropy_score;  // null until scored
  std::optional<double> u_cal;          // null until calibrated
};

struct GenerationBundle {
  std::string record_id;
  double temperature = 0.0;
  std::vector<std::string> samples;  // order preserved as generated
};

struct EmbeddingRecord {
  std::string record_id;
  std::string embed_model_tag;
  std::vector<std::vector<double>> vectors;  // aligned with the bundle order
};

struct Prediction {
  std::string id;
  double u = 0.0;  // predicted probability of being wrong
};

// dataset.jsonl: {"id","question","gold_answer","standard_answer",
//                 "incorrect","entropy_score","u_cal"}
std::vector<QARecord> load_dataset(const std::string& path);
void save_dataset(const std::string& path,
                  const std::vector<QARecord>& records);

// generations.jsonl: {"id","temperature","samples":[...]}
std::vector<GenerationBundle> load_generations(const std::string& path);
void save_generations(const std::string& path,
                      const std::vector<GenerationBundle>& bundles);

// embeddings.jsonl: {"id","embed_model_tag","vectors":[[...],...]}
std::vector<EmbeddingRecord> load_embeddings(const std::string& path);
void save_embeddings(const std::string& path,
                     const std::vector<EmbeddingRecord>& records);

// predictions.jsonl: {"id","u"}
std::vector<Prediction> load_predictions(const std::string& path);
void save_predictions(const std::string& path,
                      const std::vector<Prediction>& predictions);

// Answer-generation output: "R: <reasoning>" lines followed by "A: <answer>".
// The last line starting with "A:" wins; everything after that marker is the
// answer. ok is false when no "A:" line exists.
struct ParsedAnswer {
  std::string reasoning;
  std::string answer;
  bool ok = false;
};
ParsedAnswer parse_answer(const std::string& text);

// Finds the last "Total_uncertainty:" marker (case-insensitive) and parses
// the following decimal. Out-of-range values are clamped into [0,1] with the
// clamped flag set; a missing or unparseable value yields parse_ok = false.
UncertaintyPrediction parse_uncertainty(const std::string& text);

// Judge verdict: case-insensitive "yes" (correct) or "no" (incorrect) after
// trimming whitespace and surrounding punctuation. ok is false for anything
// else, flagging the record for re-judging.
struct Judgment {
  int incorrect = 0;
  bool ok = false;
};
Judgment parse_judgment(const std::string& text);

}  // namespace uqcal

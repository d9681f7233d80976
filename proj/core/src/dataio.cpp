#include "uqcal/dataio.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "uqcal/error.hpp"

namespace uqcal {
namespace {

using ordered_json = nlohmann::ordered_json;

const std::string& record_id_of(const QARecord& r) { return r.id; }
const std::string& record_id_of(const GenerationBundle& r) {
  return r.record_id;
}
const std::string& record_id_of(const EmbeddingRecord& r) {
  return r.record_id;
}
const std::string& record_id_of(const Prediction& r) { return r.id; }

// Shared JSONL plumbing: one JSON document per line, ids unique per file.
template <typename Record, typename FromJson>
std::vector<Record> load_jsonl(const std::string& path, FromJson from_json) {
  std::ifstream in(path);
  if (!in) raise(errc::io_error, "cannot open " + path);

  std::vector<Record> out;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      raise(errc::parse_error,
            path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    Record rec;
    try {
      rec = from_json(j);
    } catch (const nlohmann::json::exception& e) {
      raise(errc::parse_error,
            path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!seen.insert(record_id_of(rec)).second) {
      raise(errc::duplicate_id, path + ":" + std::to_string(line_no) +
                                    ": duplicate id " + record_id_of(rec));
    }
    out.push_back(std::move(rec));
  }
  if (in.bad()) raise(errc::io_error, "read failure on " + path);
  return out;
}

template <typename Record, typename ToJson>
void save_jsonl(const std::string& path, const std::vector<Record>& records,
                ToJson to_json) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) raise(errc::io_error, "cannot write " + path);
  for (const Record& rec : records) {
    out << to_json(rec).dump() << "\n";
  }
  if (!out) raise(errc::io_error, "write failure on " + path);
}

template <typename T>
void set_nullable(ordered_json& j, const char* key,
                  const std::optional<T>& v) {
  if (v) {
    j[key] = *v;
  } else {
    j[key] = nullptr;
  }
}

template <typename T>
std::optional<T> get_nullable(const ordered_json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

ordered_json qa_to_json(const QARecord& r) {
  ordered_json j;
  j["id"] = r.id;
  j["question"] = r.question;
  j["gold_answer"] = r.gold_answer;
  j["standard_answer"] = r.standard_answer;
  set_nullable(j, "incorrect", r.incorrect);
  set_nullable(j, "entropy_score", r.entropy_score);
  set_nullable(j, "u_cal", r.u_cal);
  return j;
}

QARecord qa_from_json(const ordered_json& j) {
  QARecord r;
  r.id = j.at("id").get<std::string>();
  r.question = j.at("question").get<std::string>();
  r.gold_answer = j.at("gold_answer").get<std::string>();
  r.standard_answer = j.at("standard_answer").get<std::string>();
  r.incorrect = get_nullable<int>(j, "incorrect");
  if (r.incorrect && *r.incorrect != 0 && *r.incorrect != 1) {
    throw nlohmann::json::other_error::create(
        501, "incorrect must be 0, 1 or null", nullptr);
  }
  r.entropy_score = get_nullable<double>(j, "entropy_score");
  r.u_cal = get_nullable<double>(j, "u_cal");
  return r;
}

}  // namespace

std::vector<QARecord> load_dataset(const std::string& path) {
  return load_jsonl<QARecord>(path, qa_from_json);
}

void save_dataset(const std::string& path,
                  const std::vector<QARecord>& records) {
  save_jsonl(path, records, qa_to_json);
}

std::vector<GenerationBundle> load_generations(const std::string& path) {
  return load_jsonl<GenerationBundle>(path, [](const ordered_json& j) {
    GenerationBundle b;
    b.record_id = j.at("id").get<std::string>();
    b.temperature = j.at("temperature").get<double>();
    b.samples = j.at("samples").get<std::vector<std::string>>();
    return b;
  });
}

void save_generations(const std::string& path,
                      const std::vector<GenerationBundle>& bundles) {
  save_jsonl(path, bundles, [](const GenerationBundle& b) {
    ordered_json j;
    j["id"] = b.record_id;
    j["temperature"] = b.temperature;
    j["samples"] = b.samples;
    return j;
  });
}

std::vector<EmbeddingRecord> load_embeddings(const std::string& path) {
  return load_jsonl<EmbeddingRecord>(path, [](const ordered_json& j) {
    EmbeddingRecord r;
    r.record_id = j.at("id").get<std::string>();
    r.embed_model_tag = j.at("embed_model_tag").get<std::string>();
    r.vectors = j.at("vectors").get<std::vector<std::vector<double>>>();
    return r;
  });
}

void save_embeddings(const std::string& path,
                     const std::vector<EmbeddingRecord>& records) {
  save_jsonl(path, records, [](const EmbeddingRecord& r) {
    ordered_json j;
    j["id"] = r.record_id;
    j["embed_model_tag"] = r.embed_model_tag;
    j["vectors"] = r.vectors;
    return j;
  });
}

std::vector<Prediction> load_predictions(const std::string& path) {
  return load_jsonl<Prediction>(path, [](const ordered_json& j) {
    Prediction p;
    p.id = j.at("id").get<std::string>();
    p.u = j.at("u").get<double>();
    return p;
  });
}

void save_predictions(const std::string& path,
                      const std::vector<Prediction>& predictions) {
  save_jsonl(path, predictions, [](const Prediction& p) {
    ordered_json j;
    j["id"] = p.id;
    j["u"] = p.u;
    return j;
  });
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Position just past `marker` on the last line that starts with it
// (after leading whitespace), or npos.
std::size_t last_line_marker(const std::string& text,
                             const std::string& marker) {
  std::size_t result = std::string::npos;
  std::size_t line_start = 0;
  while (line_start <= text.size()) {
    std::size_t line_end = text.find('\n', line_start);
    if (line_end == std::string::npos) line_end = text.size();
    std::size_t p = line_start;
    while (p < line_end && std::isspace(static_cast<unsigned char>(text[p]))) {
      ++p;
    }
    if (text.compare(p, marker.size(), marker) == 0) {
      result = p + marker.size();
    }
    if (line_end == text.size()) break;
    line_start = line_end + 1;
  }
  return result;
}

}  // namespace

ParsedAnswer parse_answer(const std::string& text) {
  ParsedAnswer out;
  const std::size_t answer_pos = last_line_marker(text, "A:");
  if (answer_pos == std::string::npos) return out;  // ok = false

  out.answer = trim(text.substr(answer_pos));
  out.ok = true;

  const std::size_t reasoning_pos = last_line_marker(
      text.substr(0, answer_pos > 2 ? answer_pos - 2 : 0), "R:");
  if (reasoning_pos != std::string::npos) {
    // Reasoning runs from after "R:" up to the answer marker's line.
    std::size_t stop = text.rfind('\n', answer_pos);
    if (stop == std::string::npos || stop < reasoning_pos) {
      stop = reasoning_pos;
    }
    out.reasoning = trim(text.substr(reasoning_pos, stop - reasoning_pos));
  }
  return out;
}

UncertaintyPrediction parse_uncertainty(const std::string& text) {
  static const std::string marker = "total_uncertainty:";

  std::string lower(text.size(), '\0');
  for (std::size_t i = 0; i < text.size(); ++i) {
    lower[i] = static_cast<char>(
        std::tolower(static_cast<unsigned char>(text[i])));
  }

  const std::size_t pos = lower.rfind(marker);
  UncertaintyPrediction out;
  if (pos == std::string::npos) {
    out.parse_ok = false;
    return out;
  }

  const char* start = text.c_str() + pos + marker.size();
  char* end = nullptr;
  const double v = std::strtod(start, &end);
  if (end == start || !std::isfinite(v)) {
    out.parse_ok = false;
    return out;
  }
  out.parse_ok = true;
  if (v < 0.0 || v > 1.0) {
    out.value = std::min(std::max(v, 0.0), 1.0);
    out.clamped = true;
  } else {
    out.value = v;
  }
  return out;
}

Judgment parse_judgment(const std::string& text) {
  std::string t = trim(text);
  const auto is_punct = [](char c) {
    return std::ispunct(static_cast<unsigned char>(c)) != 0;
  };
  std::size_t b = 0;
  std::size_t e = t.size();
  while (b < e && is_punct(t[b])) ++b;
  while (e > b && is_punct(t[e - 1])) --e;
  t = trim(t.substr(b, e - b));

  for (char& c : t) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));

  if (t == "yes") return Judgment{0, true};
  if (t == "no") return Judgment{1, true};
  return Judgment{0, false};
}

}  // namespace uqcal

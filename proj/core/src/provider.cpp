#include "uqcal/provider.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <random>
#include <thread>
#include <unordered_map>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "uqcal/dataio.hpp"
#include "uqcal/error.hpp"
#include "uqcal/prompts.hpp"
#include "uqcal/rng.hpp"

namespace uqcal {

const char* provider_mode_name(ProviderMode mode) noexcept {
  return mode == ProviderMode::fixture ? "fixture" : "live";
}

ProviderMode provider_mode_from_name(const std::string& name) {
  if (name == "fixture") return ProviderMode::fixture;
  if (name == "live") return ProviderMode::live;
  raise(errc::config_error, "unknown provider mode: " + name);
}

const char* purpose_name(GenerationPurpose purpose) noexcept {
  switch (purpose) {
    case GenerationPurpose::entropy_samples: return "entropy_samples";
    case GenerationPurpose::standard_answer: return "standard_answer";
    case GenerationPurpose::uncertainty: return "uncertainty";
  }
  return "unknown";
}

GenerationPurpose purpose_from_name(const std::string& name) {
  if (name == "entropy_samples") return GenerationPurpose::entropy_samples;
  if (name == "standard_answer") return GenerationPurpose::standard_answer;
  if (name == "uncertainty") return GenerationPurpose::uncertainty;
  raise(errc::config_error, "unknown generation purpose: " + name);
}

void ProviderConfig::validate() const {
  if (mode == ProviderMode::fixture) {
    if (fixture_dir.empty()) {
      raise(errc::config_error, "fixture provider needs a fixture_dir");
    }
  } else {
    if (endpoint.empty()) {
      raise(errc::config_error, "live provider needs an endpoint URL");
    }
  }
  if (max_retries < 0) raise(errc::config_error, "max_retries must be >= 0");
  if (max_concurrent_requests < 1) {
    raise(errc::config_error, "max_concurrent_requests must be >= 1");
  }
  if (!(timeout_seconds > 0.0)) {
    raise(errc::config_error, "timeout_seconds must be > 0");
  }
}

namespace {

using nlohmann::json;

std::string format_temperature(double t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", t);
  return buf;
}

std::string fixture_key(const std::string& record_id, GenerationPurpose p,
                        double temperature) {
  return record_id + "|" + purpose_name(p) + "|" +
         format_temperature(temperature);
}

std::string normalized_for_match(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char raw : s) {
    const auto c = static_cast<unsigned char>(raw);
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// fixture provider
// ---------------------------------------------------------------------------

class FixtureProvider final : public Provider {
 public:
  explicit FixtureProvider(const ProviderConfig& config) : config_(config) {
    // Generations: same schema as generations.jsonl plus an optional
    // "purpose" field (defaults to entropy_samples).
    const std::string gen_path = config_.fixture_dir + "/generations.jsonl";
    std::ifstream probe(gen_path);
    if (probe.good()) {
      load_generation_fixture(gen_path);
    }
    const std::string emb_path = config_.fixture_dir + "/embeddings.jsonl";
    std::ifstream probe_emb(emb_path);
    if (probe_emb.good()) {
      for (EmbeddingRecord& rec : load_embeddings(emb_path)) {
        embeddings_.emplace(rec.record_id, std::move(rec));
      }
    }
  }

  std::vector<std::string> generate(const std::string& record_id,
                                    GenerationPurpose purpose,
                                    const std::string& prompt,
                                    double temperature, int n) override {
    (void)prompt;  // fixtures replay by key, not by prompt content
    requests_.fetch_add(1, std::memory_order_relaxed);
    const std::string key = fixture_key(record_id, purpose, temperature);
    const auto it = generations_.find(key);
    if (it == generations_.end()) {
      raise(errc::fixture_incomplete,
            "no fixture generations for key (id=" + record_id + ", purpose=" +
                purpose_name(purpose) +
                ", temperature=" + format_temperature(temperature) + ")");
    }
    if (static_cast<int>(it->second.size()) < n) {
      raise(errc::fixture_incomplete,
            "fixture for key (id=" + record_id + ", purpose=" +
                purpose_name(purpose) + ") stores " +
                std::to_string(it->second.size()) + " samples, requested " +
                std::to_string(n));
    }
    return {it->second.begin(), it->second.begin() + n};
  }

  std::vector<std::vector<double>> embed(
      const std::string& record_id,
      const std::vector<std::string>& texts) override {
    requests_.fetch_add(1, std::memory_order_relaxed);
    const auto it = embeddings_.find(record_id);
    if (it == embeddings_.end()) {
      raise(errc::fixture_incomplete,
            "no fixture embeddings for id=" + record_id);
    }
    if (it->second.vectors.size() < texts.size()) {
      raise(errc::fixture_incomplete,
            "fixture embeddings for id=" + record_id + " hold " +
                std::to_string(it->second.vectors.size()) +
                " vectors, requested " + std::to_string(texts.size()));
    }
    return {it->second.vectors.begin(),
            it->second.vectors.begin() + static_cast<long>(texts.size())};
  }

  std::string judge(const std::string& question, const std::string& gold_answer,
                    const std::string& answer) override {
    (void)question;
    requests_.fetch_add(1, std::memory_order_relaxed);
    // Offline stand-in for the judge model: exact match after case and
    // whitespace normalization.
    return normalized_for_match(answer) == normalized_for_match(gold_answer)
               ? "yes"
               : "no";
  }

  ProviderStats stats() const override {
    return ProviderStats{requests_.load(std::memory_order_relaxed), 0};
  }

 private:
  void load_generation_fixture(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(errc::io_error, "cannot open " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::exception& e) {
        raise(errc::parse_error,
              path + ":" + std::to_string(line_no) + ": " + e.what());
      }
      try {
        const auto id = j.at("id").get<std::string>();
        const auto temperature = j.at("temperature").get<double>();
        const std::string purpose =
            j.contains("purpose") ? j.at("purpose").get<std::string>()
                                  : "entropy_samples";
        const std::string key =
            fixture_key(id, purpose_from_name(purpose), temperature);
        generations_[key] = j.at("samples").get<std::vector<std::string>>();
      } catch (const json::exception& e) {
        raise(errc::parse_error,
              path + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
  }

  ProviderConfig config_;
  std::unordered_map<std::string, std::vector<std::string>> generations_;
  std::unordered_map<std::string, EmbeddingRecord> embeddings_;
  std::atomic<std::uint64_t> requests_{0};
};

// ---------------------------------------------------------------------------
// live provider (OpenAI-compatible wire format)
// ---------------------------------------------------------------------------

class BoundedSlots {
 public:
  explicit BoundedSlots(int limit) : available_(limit) {}

  void acquire() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return available_ > 0; });
    --available_;
  }

  void release() {
    {
      std::lock_guard lock(mutex_);
      ++available_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  int available_;
};

struct SlotGuard {
  explicit SlotGuard(BoundedSlots& slots) : slots_(slots) { slots_.acquire(); }
  ~SlotGuard() { slots_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;
  BoundedSlots& slots_;
};

class HttpProvider final : public Provider {
 public:
  explicit HttpProvider(const ProviderConfig& config)
      : config_(config),
        slots_(config.max_concurrent_requests),
        jitter_(std::random_device{}()) {
    // Split the endpoint into authority (scheme://host:port) and path prefix.
    const std::size_t scheme = config_.endpoint.find("://");
    if (scheme == std::string::npos) {
      raise(errc::config_error,
            "endpoint must be a URL with scheme: " + config_.endpoint);
    }
    const std::size_t path = config_.endpoint.find('/', scheme + 3);
    if (path == std::string::npos) {
      base_ = config_.endpoint;
    } else {
      base_ = config_.endpoint.substr(0, path);
      prefix_ = config_.endpoint.substr(path);
      while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
    }
    if (const char* token = std::getenv(config_.auth_token_env.c_str())) {
      token_ = token;
    }
  }

  std::vector<std::string> generate(const std::string& record_id,
                                    GenerationPurpose purpose,
                                    const std::string& prompt,
                                    double temperature, int n) override {
    (void)record_id;
    (void)purpose;
    json body;
    body["model"] = config_.generator_model;
    body["messages"] =
        json::array({{{"role", "user"}, {"content", prompt}}});
    body["temperature"] = temperature;
    body["n"] = n;

    const json reply = post_json("/chat/completions", body);
    std::vector<std::string> out;
    try {
      for (const json& choice : reply.at("choices")) {
        out.push_back(choice.at("message").at("content").get<std::string>());
      }
    } catch (const json::exception& e) {
      raise(errc::provider_error,
            std::string("malformed chat completion response: ") + e.what());
    }
    if (static_cast<int>(out.size()) != n) {
      raise(errc::provider_error,
            "requested " + std::to_string(n) + " choices, got " +
                std::to_string(out.size()));
    }
    return out;
  }

  std::vector<std::vector<double>> embed(
      const std::string& record_id,
      const std::vector<std::string>& texts) override {
    (void)record_id;
    json body;
    body["model"] = config_.embedder_model;
    body["input"] = texts;

    const json reply = post_json("/embeddings", body);
    std::vector<std::vector<double>> out(texts.size());
    try {
      for (const json& item : reply.at("data")) {
        const auto idx = item.at("index").get<std::size_t>();
        if (idx >= out.size()) {
          raise(errc::provider_error, "embedding index out of range");
        }
        out[idx] = item.at("embedding").get<std::vector<double>>();
      }
    } catch (const json::exception& e) {
      raise(errc::provider_error,
            std::string("malformed embeddings response: ") + e.what());
    }
    return out;
  }

  std::string judge(const std::string& question, const std::string& gold_answer,
                    const std::string& answer) override {
    const std::string prompt = render_prompt("judge", {{"question", question},
                                                       {"gold_answer", gold_answer},
                                                       {"answer", answer}});
    json body;
    body["model"] = config_.judge_model;
    body["messages"] = json::array({{{"role", "user"}, {"content", prompt}}});
    body["temperature"] = 0.0;
    body["n"] = 1;
    const json reply = post_json("/chat/completions", body);
    try {
      return reply.at("choices").at(0).at("message").at("content")
          .get<std::string>();
    } catch (const json::exception& e) {
      raise(errc::provider_error,
            std::string("malformed judge response: ") + e.what());
    }
  }

  ProviderStats stats() const override {
    return ProviderStats{requests_.load(std::memory_order_relaxed),
                         retries_.load(std::memory_order_relaxed)};
  }

 private:
  json post_json(const std::string& path, const json& body) {
    requests_.fetch_add(1, std::memory_order_relaxed);
    const std::string full_path = prefix_ + path;
    const std::string payload = body.dump();

    std::string last_failure = "no attempt made";
    const int attempts = config_.max_retries + 1;
    for (int attempt = 0; attempt < attempts; ++attempt) {
      if (attempt > 0) {
        const double jitter = [&] {
          std::lock_guard lock(jitter_mutex_);
          return jitter_.u01();
        }();
        const double delay = config_.retry_base_delay_seconds *
                             std::pow(2.0, attempt - 1) * (1.0 + 0.25 * jitter);
        std::this_thread::sleep_for(std::chrono::duration<double>(delay));
        retries_.fetch_add(1, std::memory_order_relaxed);
        std::fprintf(stderr, "uqcal: retrying POST %s (attempt %d/%d): %s\n",
                     full_path.c_str(), attempt + 1, attempts,
                     last_failure.c_str());
      }

      httplib::Result res = [&] {
        SlotGuard guard(slots_);
        httplib::Client client(base_);
        const auto connect_ms = static_cast<time_t>(config_.timeout_seconds);
        const auto usec = static_cast<time_t>(
            (config_.timeout_seconds - connect_ms) * 1e6);
        client.set_connection_timeout(connect_ms, usec);
        client.set_read_timeout(connect_ms, usec);
        client.set_write_timeout(connect_ms, usec);
        httplib::Headers headers;
        if (!token_.empty()) {
          headers.emplace("Authorization", "Bearer " + token_);
        }
        return client.Post(full_path, headers, payload, "application/json");
      }();

      if (!res) {
        last_failure = "transport error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status == 429 || res->status >= 500) {
        last_failure = "http status " + std::to_string(res->status);
        continue;
      }
      if (res->status != 200) {
        raise(errc::provider_error,
              "POST " + base_ + full_path + " failed with status " +
                  std::to_string(res->status) + ": " + res->body);
      }
      try {
        return json::parse(res->body);
      } catch (const json::exception& e) {
        raise(errc::provider_error,
              "POST " + base_ + full_path +
                  " returned unparseable JSON: " + e.what());
      }
    }
    raise(errc::provider_error,
          "POST " + base_ + full_path + " failed after " +
              std::to_string(attempts) + " attempts; last: " + last_failure);
  }

  ProviderConfig config_;
  std::string base_;
  std::string prefix_;
  std::string token_;
  BoundedSlots slots_;
  std::mutex jitter_mutex_;
  Rng jitter_;
  std::atomic<std::uint64_t> requests_{0};
  std::atomic<std::uint64_t> retries_{0};
};

}  // namespace

std::unique_ptr<Provider> make_provider(const ProviderConfig& config) {
  config.validate();
  if (config.mode == ProviderMode::fixture) {
    return std::make_unique<FixtureProvider>(config);
  }
  return std::make_unique<HttpProvider>(config);
}

}  // namespace uqcal

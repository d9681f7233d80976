// provider.hpp — generation / embedding / judging backends.
//
// Two implementations sit behind one interface: a live client speaking the
// OpenAI-compatible chat-completions and embeddings wire format (bounded
// retries with exponential backoff and jitter, bounded concurrency), and an
// offline fixture provider that replays stored files deterministically so
// runs need no network or model.

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace uqcal {

enum class ProviderMode { fixture, live };

// What a generation request is for; part of the fixture lookup key.
enum class GenerationPurpose { entropy_samples, standard_answer, uncertainty };

const char* provider_mode_name(ProviderMode mode) noexcept;
ProviderMode provider_mode_from_name(const std::string& name);
const char* purpose_name(GenerationPurpose purpose) noexcept;
GenerationPurpose purpose_from_name(const std::string& name);

struct ProviderConfig {
  ProviderMode mode = ProviderMode::fixture;

  // fixture mode
  std::string fixture_dir;

  // live mode
  std::string endpoint;  // base URL, e.g. http://localhost:8000/v1
  std::string auth_token_env = "UQCAL_API_TOKEN";
  std::string generator_model = "generator";
  std::string embedder_model = "embedder";
  std::string judge_model = "judge";
  double timeout_seconds = 30.0;
  int max_retries = 3;
  int max_concurrent_requests = 4;
  double retry_base_delay_seconds = 0.2;

  void validate() const;  // throws config_error
};

struct ProviderStats {
  std::uint64_t requests = 0;
  std::uint64_t retries = 0;
};

class Provider {
 public:
  virtual ~Provider() = default;

  // n sampled generations for the prompt. Fixture lookups are keyed by
  // (record_id, purpose, temperature).
  virtual std::vector<std::string> generate(const std::string& record_id,
                                            GenerationPurpose purpose,
                                            const std::string& prompt,
                                            double temperature, int n) = 0;

  // One embedding vector per input text, aligned with the input order.
  virtual std::vector<std::vector<double>> embed(
      const std::string& record_id, const std::vector<std::string>& texts) = 0;

  // Raw judge verdict text ("yes"/"no" expected; parse_judgment decides).
  virtual std::string judge(const std::string& question,
                            const std::string& gold_answer,
                            const std::string& answer) = 0;

  virtual ProviderStats stats() const = 0;
};

std::unique_ptr<Provider> make_provider(const ProviderConfig& config);

}  // namespace uqcal

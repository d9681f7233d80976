// uqcal_mkfixture.cpp — deterministic demo-fixture generator.
//
// Produces a synthetic QA dataset plus aligned generations and embeddings
// for offline runs. Per-question difficulty drives both the chance of an
// incorrect standard answer and how many distinct answers appear among the
// K sampled generations. Embeddings are a deterministic function of the
// sampled text (identical texts embed identically, distinct answers land on
// distinct unit vectors), so easy questions collapse to rank-one kernels
// with near-zero entropy while hard ones spread over several clusters.
// Entropy scores therefore carry real signal about incorrectness and a
// Platt fit on the fixture learns a positive slope.
//
// The shipped fixtures/demo directory is the committed output of this tool;
// regenerate with the same seed to reproduce it byte for byte.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "uqcal/calibration.hpp"
#include "uqcal/dataio.hpp"
#include "uqcal/error.hpp"
#include "uqcal/rng.hpp"

namespace {

double round6(double v) { return std::round(v * 1e6) / 1e6; }

std::string format_number(long v) { return std::to_string(v); }

// Deterministic per-(question, text) unit vector; stands in for an
// embedding model, which maps equal texts to equal vectors.
std::vector<double> embed_text(const std::string& record_id,
                               const std::string& text, int dim) {
  uqcal::Rng rng(uqcal::derive_seed(uqcal::fnv1a64(record_id + "\x1f" + text),
                                    "demo-embedder"));
  std::vector<double> v(static_cast<std::size_t>(dim));
  double norm2 = 0.0;
  for (double& x : v) {
    x = rng.normal();
    norm2 += x * x;
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& x : v) x = round6(x * inv);
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate the deterministic demo fixture"};

  std::string out_dir = "fixtures/demo";
  std::uint64_t seed = 7;
  int questions = 200;
  int samples = 8;
  int dim = 16;
  double judged_fraction = 0.9;

  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--seed", seed, "Generator seed");
  app.add_option("--questions", questions, "Number of QA records");
  app.add_option("--samples", samples, "Sampled generations per question (K)");
  app.add_option("--dim", dim, "Embedding dimension");
  app.add_option("--judged-fraction", judged_fraction,
                 "Fraction of records with the incorrect label pre-filled; "
                 "the rest stay null for the judge stage");

  CLI11_PARSE(app, argc, argv);

  try {
    uqcal::Rng rng(uqcal::derive_seed(seed, "demo-fixture"));

    std::vector<uqcal::QARecord> records;
    std::vector<uqcal::EmbeddingRecord> embeddings;
    std::vector<uqcal::GenerationBundle> generations;

    for (int i = 0; i < questions; ++i) {
      char id[16];
      std::snprintf(id, sizeof(id), "q%04d", i);

      const long a = static_cast<long>(rng.below(900)) + 100;
      const long b = static_cast<long>(rng.below(900)) + 100;
      const long gold = a + b;

      // Difficulty in [0,1] controls both the error probability and the
      // embedding dispersion.
      const double difficulty = rng.u01();
      const double p_incorrect =
          uqcal::stable_sigmoid(4.0 * difficulty - 2.0);
      const int incorrect = rng.bernoulli(p_incorrect);

      const long wrong = gold + (rng.bernoulli(0.5) ? 1 : -1) *
                                    (static_cast<long>(rng.below(90)) + 1);
      const std::string standard = format_number(incorrect ? wrong : gold);

      uqcal::QARecord rec;
      rec.id = id;
      rec.question = "What is " + std::to_string(a) + " + " +
                     std::to_string(b) + "?";
      rec.gold_answer = format_number(gold);
      rec.standard_answer = standard;
      if (rng.u01() < judged_fraction) {
        rec.incorrect = incorrect;
      }
      records.push_back(std::move(rec));

      // Sampled generations: the correct answer competes with a small pool
      // of wrong candidates; harder questions answer wrongly more often and
      // spread over more candidates, which widens the embedding spectrum.
      std::vector<long> wrong_pool(1 + static_cast<std::size_t>(3.0 * difficulty));
      for (long& w : wrong_pool) {
        w = gold + (rng.bernoulli(0.5) ? 1 : -1) *
                       (static_cast<long>(rng.below(90)) + 1);
      }
      const double p_sample_wrong = 0.85 * difficulty;

      uqcal::EmbeddingRecord emb;
      emb.record_id = id;
      emb.embed_model_tag = "demo-embedder-v1";
      uqcal::GenerationBundle entropy_samples;
      entropy_samples.record_id = id;
      entropy_samples.temperature = 1.0;
      for (int k = 0; k < samples; ++k) {
        long guess = gold;
        if (rng.u01() < p_sample_wrong) {
          guess = wrong_pool[rng.below(wrong_pool.size())];
        }
        const std::string text = "R: Adding " + std::to_string(a) + " and " +
                                 std::to_string(b) +
                                 ".\nA: " + std::to_string(guess);
        emb.vectors.push_back(embed_text(id, text, dim));
        entropy_samples.samples.push_back(text);
      }
      embeddings.push_back(std::move(emb));
      generations.push_back(std::move(entropy_samples));

      uqcal::GenerationBundle standard_gen;
      standard_gen.record_id = id;
      standard_gen.temperature = 0.1;
      standard_gen.samples.push_back(
          "R: Adding " + std::to_string(a) + " and " + std::to_string(b) +
          ".\nA: " + standard);
      generations.push_back(std::move(standard_gen));
    }

    std::filesystem::create_directories(out_dir);
    uqcal::save_dataset(out_dir + "/dataset.jsonl", records);
    uqcal::save_embeddings(out_dir + "/embeddings.jsonl", embeddings);

    // generations.jsonl carries a purpose column for the fixture provider's
    // (id, purpose, temperature) lookup key.
    {
      std::ofstream out(out_dir + "/generations.jsonl", std::ios::trunc);
      if (!out) {
        uqcal::raise(uqcal::errc::io_error,
                     "cannot write " + out_dir + "/generations.jsonl");
      }
      for (const uqcal::GenerationBundle& g : generations) {
        nlohmann::ordered_json j;
        j["id"] = g.record_id;
        j["purpose"] =
            g.temperature == 1.0 ? "entropy_samples" : "standard_answer";
        j["temperature"] = g.temperature;
        j["samples"] = g.samples;
        out << j.dump() << "\n";
      }
    }

    std::printf("wrote %d records (K=%d, d=%d) to %s\n", questions, samples,
                dim, out_dir.c_str());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

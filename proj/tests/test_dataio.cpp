#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "uqcal/dataio.hpp"
#include "uqcal/error.hpp"
#include "uqcal/prompts.hpp"
#include "uqcal/rng.hpp"

using namespace uqcal;

namespace {

std::string temp_file(const char* name) {
  static const auto dir =
      std::filesystem::temp_directory_path() /
      ("uqcal-dataio-" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

}  // namespace

TEST_CASE("parse_answer on the spec cases") {
  const ParsedAnswer a = parse_answer("R: It is the capital.\nA: Paris");
  CHECK(a.ok);
  CHECK(a.reasoning == "It is the capital.");
  CHECK(a.answer == "Paris");

  const ParsedAnswer b = parse_answer("A: 42");
  CHECK(b.ok);
  CHECK(b.reasoning.empty());
  CHECK(b.answer == "42");

  const ParsedAnswer c =
      parse_answer("R: first try\nA: wrong\nR: rethinking\nA: right");
  CHECK(c.ok);
  CHECK(c.answer == "right");

  const ParsedAnswer d = parse_answer("no marker at all");
  CHECK_FALSE(d.ok);

  // marker must start a line
  const ParsedAnswer e = parse_answer("NASA: not an answer line");
  CHECK_FALSE(e.ok);
}

TEST_CASE("parse_uncertainty on the spec cases") {
  const UncertaintyPrediction a =
      parse_uncertainty("Reflection: shaky.\nTotal_uncertainty: 0.35");
  CHECK(a.parse_ok);
  CHECK(a.value == doctest::Approx(0.35));
  CHECK_FALSE(a.clamped);

  const UncertaintyPrediction b = parse_uncertainty("Total_uncertainty: 1.3");
  CHECK(b.parse_ok);
  CHECK(b.value == doctest::Approx(1.0));
  CHECK(b.clamped);

  const UncertaintyPrediction c = parse_uncertainty("I am not sure.");
  CHECK_FALSE(c.parse_ok);

  // last occurrence wins, case-insensitive
  const UncertaintyPrediction d = parse_uncertainty(
      "total_uncertainty: 0.9\nOn reflection...\nTOTAL_UNCERTAINTY: 0.2");
  CHECK(d.parse_ok);
  CHECK(d.value == doctest::Approx(0.2));

  const UncertaintyPrediction e = parse_uncertainty("Total_uncertainty: n/a");
  CHECK_FALSE(e.parse_ok);

  const UncertaintyPrediction f = parse_uncertainty("Total_uncertainty: -0.2");
  CHECK(f.parse_ok);
  CHECK(f.value == 0.0);
  CHECK(f.clamped);
}

TEST_CASE("parse_judgment on the spec cases") {
  CHECK(parse_judgment("yes").ok);
  CHECK(parse_judgment("yes").incorrect == 0);

  const Judgment no = parse_judgment(" No.");
  CHECK(no.ok);
  CHECK(no.incorrect == 1);

  CHECK_FALSE(parse_judgment("maybe").ok);
  CHECK(parse_judgment("\"YES\"").ok);
  CHECK(parse_judgment("\"YES\"").incorrect == 0);
  CHECK_FALSE(parse_judgment("").ok);
}

TEST_CASE("dataset round-trip is byte-stable after the first save") {
  Rng rng(1);
  std::vector<QARecord> records;
  for (int i = 0; i < 100; ++i) {
    QARecord r;
    r.id = "r" + std::to_string(i);
    r.question = "question " + std::to_string(i) + " with \"quotes\" and \n";
    r.gold_answer = std::to_string(rng.below(1000));
    r.standard_answer = std::to_string(rng.below(1000));
    if (rng.bernoulli(0.7)) r.incorrect = rng.bernoulli(0.5);
    if (rng.bernoulli(0.7)) r.entropy_score = rng.uniform(0.0, 3.0);
    if (rng.bernoulli(0.7)) r.u_cal = rng.u01();
    records.push_back(std::move(r));
  }

  const std::string p1 = temp_file("roundtrip1.jsonl");
  const std::string p2 = temp_file("roundtrip2.jsonl");
  save_dataset(p1, records);
  const std::vector<QARecord> loaded = load_dataset(p1);
  REQUIRE(loaded.size() == records.size());
  save_dataset(p2, loaded);
  CHECK(slurp(p1) == slurp(p2));

  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(loaded[i].id == records[i].id);
    CHECK(loaded[i].question == records[i].question);
    CHECK(loaded[i].incorrect == records[i].incorrect);
    CHECK(loaded[i].entropy_score == records[i].entropy_score);
    CHECK(loaded[i].u_cal == records[i].u_cal);
  }
}

TEST_CASE("dataset loader errors carry line numbers") {
  const std::string p = temp_file("bad.jsonl");
  spit(p,
       R"({"id":"a","question":"q","gold_answer":"g","standard_answer":"s","incorrect":null,"entropy_score":null,"u_cal":null})"
       "\n"
       R"({"id":"b","question":"q",})"
       "\n");
  CHECK_THROWS_WITH_AS(load_dataset(p), doctest::Contains(":2"), Error);

  const std::string dup = temp_file("dup.jsonl");
  spit(dup,
       R"({"id":"a","question":"q","gold_answer":"g","standard_answer":"s","incorrect":null,"entropy_score":null,"u_cal":null})"
       "\n"
       R"({"id":"a","question":"q","gold_answer":"g","standard_answer":"s","incorrect":null,"entropy_score":null,"u_cal":null})"
       "\n");
  CHECK_THROWS_WITH_AS(load_dataset(dup), doctest::Contains("duplicate"),
                       Error);
}

TEST_CASE("empty file loads as an empty dataset") {
  const std::string p = temp_file("empty.jsonl");
  spit(p, "");
  CHECK(load_dataset(p).empty());
}

TEST_CASE("null fields serialize as literal null in schema order") {
  QARecord r;
  r.id = "x";
  r.question = "q";
  r.gold_answer = "g";
  r.standard_answer = "s";
  const std::string p = temp_file("nulls.jsonl");
  save_dataset(p, {r});
  CHECK(slurp(p) ==
        "{\"id\":\"x\",\"question\":\"q\",\"gold_answer\":\"g\","
        "\"standard_answer\":\"s\",\"incorrect\":null,\"entropy_score\":null,"
        "\"u_cal\":null}\n");
}

TEST_CASE("embeddings and generations round-trip") {
  EmbeddingRecord e;
  e.record_id = "q1";
  e.embed_model_tag = "tag";
  e.vectors = {{0.25, -1.5}, {3.0, 4.0}};
  const std::string pe = temp_file("emb.jsonl");
  save_embeddings(pe, {e});
  const auto loaded_e = load_embeddings(pe);
  REQUIRE(loaded_e.size() == 1);
  CHECK(loaded_e[0].vectors == e.vectors);
  CHECK(loaded_e[0].embed_model_tag == "tag");

  GenerationBundle g;
  g.record_id = "q1";
  g.temperature = 1.0;
  g.samples = {"first", "second"};
  const std::string pg = temp_file("gen.jsonl");
  save_generations(pg, {g});
  const auto loaded_g = load_generations(pg);
  REQUIRE(loaded_g.size() == 1);
  CHECK(loaded_g[0].samples == g.samples);
  CHECK(loaded_g[0].temperature == doctest::Approx(1.0));
}

TEST_CASE("predictions round-trip") {
  const std::string p = temp_file("pred.jsonl");
  save_predictions(p, {{"a", 0.25}, {"b", 0.75}});
  const auto loaded = load_predictions(p);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].id == "a");
  CHECK(loaded[1].u == doctest::Approx(0.75));
}

TEST_CASE("render_prompt substitutes byte-exactly") {
  const std::string judge =
      render_prompt("judge", {{"question", "Q?"},
                              {"gold_answer", "GOLD"},
                              {"answer", "CAND"}});
  CHECK(judge.find("Question: Q?") != std::string::npos);
  CHECK(judge.find("Ground truth answer: GOLD") != std::string::npos);
  CHECK(judge.find("Model generated answer: CAND") != std::string::npos);
  CHECK(judge.find('{') == std::string::npos);

  const std::string cot = render_prompt(
      "uncertainty_cot", {{"question", "Q?"}, {"answer", "A!"}});
  // the rendered prompt must end with the output-format block
  const std::string tail = "Total_uncertainty: <float between 0 and 1>\n";
  REQUIRE(cot.size() >= tail.size());
  CHECK(cot.compare(cot.size() - tail.size(), tail.size(), tail) == 0);
}

TEST_CASE("render_prompt errors") {
  CHECK_THROWS_WITH_AS(render_prompt("nope", {}),
                       doctest::Contains("unknown prompt template"), Error);
  CHECK_THROWS_WITH_AS(render_prompt("judge", {{"question", "q"}}),
                       doctest::Contains("gold_answer"), Error);
  // extra slots are ignored
  CHECK_NOTHROW(render_prompt("answer_generation",
                              {{"question", "q"}, {"extra", "x"}}));
}

TEST_CASE("prompt assets match the built-in templates byte for byte") {
  const std::string root = UQCAL_SOURCE_DIR;
  const std::pair<const char*, const char*> files[] = {
      {"answer_generation", "answer_generation.txt"},
      {"judge", "judge.txt"},
      {"uncertainty_cot", "uncertainty_cot.txt"},
      {"uncertainty_direct", "uncertainty_direct.txt"},
  };
  for (const auto& [id, file] : files) {
    CAPTURE(id);
    CHECK(slurp(root + "/assets/prompts/" + file) == prompt_template(id));
  }
}

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rewardkit/pipeline.hpp"

using namespace rewardkit;
using namespace rewardkit::pipeline;

namespace {

RolloutRecord record(std::string id, std::string q, std::string text, std::optional<std::string> truth = {},
                     std::optional<double> rm = {}) {
  RolloutRecord r;
  r.id = std::move(id);
  r.question_id = std::move(q);
  r.response_text = std::move(text);
  r.ground_truth = std::move(truth);
  r.rm_score = rm;
  return r;
}

PipelineConfig with_mode(RewardMode mode) {
  PipelineConfig c;
  c.mode = mode;
  return c;
}

std::vector<RolloutRecord> corpus() {
  std::vector<RolloutRecord> out;
  for (int i = 0; i < 60; ++i) {
    const auto q = "q" + std::to_string(i / 4);
    const std::string body = i % 3 == 0 ? "first, we need to wait" : "thus hence";
    const std::string answer = i % 2 ? "\\boxed{42}" : "\\boxed{41}";
    out.push_back(record("r" + std::to_string(i), q, "Assistant: <think> " + body + " </think> <answer>" + answer + "</answer>",
                         "42", (i % 10) / 10.0));
  }
  return out;
}

}  // namespace

TEST_CASE("mode examples") {
  const auto v = score_batch({record("a", "q", "\\boxed{7}", "7")}, with_mode(RewardMode::verify));
  REQUIRE(v.size() == 1);
  CHECK(v[0].final_reward == 1);
  CHECK(v[0].components == std::vector<StageValue>{{"verify", 1}});

  const auto r = score_batch({record("a", "q", "First, we need to factor. Wait, let me check; therefore done.")},
                             with_mode(RewardMode::rpr_only));
  CHECK(r[0].final_reward == doctest::Approx(0.125));

  const std::string out = "Assistant: <think> " + std::string(
      "i need to we need to wait alternatively let me check let me see let's focus on we know that "
      "let me try let's try let us try first, firstly, next, finally, let us first let's first let me first "
      "try again still not") + " </think><answer>x</answer>";
  const auto c = score_batch({record("a", "q", out, {}, 0.3)}, with_mode(RewardMode::rm_calibrated));
  REQUIRE(c[0].ok());
  CHECK(c[0].components.size() == 2);
  CHECK(c[0].components[0] == StageValue{"rm", 0.3});
  CHECK(c[0].components[1].stage == "calibrate");
  CHECK(c[0].final_reward == doctest::Approx(0.35));
}

TEST_CASE("missing fields are in-band errors") {
  const auto v = score_batch({record("a", "q", "\\boxed{7}"), record("b", "q", "\\boxed{7}", "7")},
                             with_mode(RewardMode::verify));
  CHECK_FALSE(v[0].ok());
  CHECK(v[1].ok());
  const auto rm = score_batch({record("a", "q", "x", {}, 1.5), record("b", "q", "x")}, with_mode(RewardMode::rm));
  CHECK_FALSE(rm[0].ok());
  CHECK_FALSE(rm[1].ok());
  CHECK_THROWS_AS(score_batch({record("a", "q", "x"), record("a", "q", "y")}, with_mode(RewardMode::rpr_only)),
                  BatchValidationError);
}

TEST_CASE("provenance, order and question-wise flips") {
  auto config = with_mode(RewardMode::verify_flip);
  config.noise.p = 0.5;
  config.seed = 99;
  const auto records = corpus();
  const auto out = score_batch(records, config);
  REQUIRE(out.size() == records.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    CHECK(out[i].id == records[i].id);
    REQUIRE_FALSE(out[i].components.empty());
    CHECK(out[i].final_reward == out[i].components.back().value);
    // flipped iff verify and flip stages disagree; the decision is shared per question
    const bool flipped = out[i].components[0].value != out[i].components[1].value;
    const bool first_flipped = out[i / 4 * 4].components[0].value != out[i / 4 * 4].components[1].value;
    CHECK(flipped == first_flipped);
  }
  CHECK(score_batch(records, config)[7].final_reward == out[7].final_reward);
}

TEST_CASE("config round trip gives identical scoring") {
  const auto dir = std::filesystem::temp_directory_path() / "rewardkit_pipeline_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "lex.txt") << "wait\nthus\n\nhence\n";
  }
  for (const auto mode : {RewardMode::verify, RewardMode::verify_flip, RewardMode::rpr_only, RewardMode::rm,
                          RewardMode::rm_calibrated}) {
    auto config = with_mode(mode);
    config.noise.p = 0.3;
    config.seed = 5;
    config.calibration.alpha = 0.2;
    config.lexicon_path = dir / "lex.txt";
    const auto j = config_to_json(config);
    {
      std::ofstream(dir / "config.json") << j.dump(2);
    }
    const auto reloaded = load_config(dir / "config.json");
    CHECK(config_to_json(reloaded) == j);
    const auto a = score_batch(corpus(), config);
    const auto b = score_batch(corpus(), reloaded);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(signal_to_json(a[i]) == signal_to_json(b[i]));
  }
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(config_from_json({{"mode", "nope"}}), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"bogus", 1}}), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"noise", {{"p", 2.0}}}}), ConfigError);
  auto c = with_mode(RewardMode::rpr_only);
  c.lexicon_path = "/nonexistent/lexicon.txt";
  CHECK_THROWS_AS(Scorer{c}, ConfigError);
}

TEST_CASE("record json") {
  const auto r = record_from_json({{"id", 7}, {"question_id", "q"}, {"response_text", "t"}, {"rm_score", 0.5}});
  CHECK(r.id == "7");
  CHECK(r.rm_score == 0.5);
  CHECK(record_from_json(record_to_json(r)).id == "7");
  CHECK_THROWS(record_from_json({{"id", "x"}}));
  CHECK_THROWS(record_from_json({{"id", "x"}, {"question_id", "q"}, {"response_text", "t"}, {"presentation", -1}}));

  std::istringstream in("{\"id\":\"a\",\"question_id\":\"q\",\"response_text\":\"t\"}\nnot json\n\n{\"id\":\"b\"}\n");
  const auto parsed = read_records(in);
  CHECK(parsed.records.size() == 1);
  REQUIRE(parsed.errors.size() == 2);
  CHECK(parsed.errors[0].first == 2);
  CHECK(parsed.errors[1].first == 4);

  RewardSignal s;
  s.id = "z";
  s.final_reward = 1;
  s.components = {{"verify", 1}};
  const auto back = signal_from_json(signal_to_json(s));
  CHECK(back.components == s.components);
}

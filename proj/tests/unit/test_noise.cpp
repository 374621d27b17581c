#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <string>

#include "rewardkit/noise.hpp"

using namespace rewardkit::noise;

namespace {

NoiseSpec spec_with(double p, std::uint64_t seed = 3) {
  NoiseSpec s;
  s.p = p;
  s.seed = seed;
  return s;
}

}  // namespace

TEST_CASE("degenerate probabilities") {
  for (int q = 0; q < 1000; ++q) {
    const auto id = "q" + std::to_string(q);
    CHECK_FALSE(flip_decision(id, 0, spec_with(0.0)));
    CHECK(flip_decision(id, 0, spec_with(1.0)));
  }
}

TEST_CASE("spec validation") {
  CHECK_THROWS_AS(spec_with(-0.1).validate(), std::invalid_argument);
  CHECK_THROWS_AS(spec_with(1.5).validate(), std::invalid_argument);
  CHECK_NOTHROW(spec_with(0.5).validate());
  CHECK(parse_granularity("output_wise") == Granularity::output_wise);
  CHECK_FALSE(parse_resample("sometimes").has_value());
}

TEST_CASE("question-wise batch flips complement every rollout together") {
  const std::vector<BinaryReward> batch = {{"q", 0, 1}, {"q", 1, 1}, {"q", 2, 0}, {"q", 3, 1}};
  const auto flipped = flip_batch(batch, 0, spec_with(1.0));
  CHECK(flipped[0].reward == 0);
  CHECK(flipped[1].reward == 0);
  CHECK(flipped[2].reward == 1);
  CHECK(flipped[3].reward == 0);
  const auto same = flip_batch(batch, 0, spec_with(0.0));
  for (std::size_t i = 0; i < batch.size(); ++i) CHECK(same[i].reward == batch[i].reward);
  CHECK_THROWS_AS(flip_batch({{"q", 0, 0.5}}, 0, spec_with(0.3)), std::domain_error);
}

TEST_CASE("resampling policies") {
  auto spec = spec_with(0.5);
  int changed = 0;
  for (int q = 0; q < 2000; ++q) {
    const auto id = "q" + std::to_string(q);
    changed += flip_decision(id, 0, spec) != flip_decision(id, 1, spec);
  }
  CHECK(changed > 800);
  CHECK(changed < 1200);

  spec.resample = Resample::once_per_question;
  for (int q = 0; q < 2000; ++q) {
    const auto id = "q" + std::to_string(q);
    CHECK(flip_decision(id, 0, spec) == flip_decision(id, 7, spec));
  }
}

TEST_CASE("output-wise decisions are independent per rollout") {
  auto spec = spec_with(0.5);
  spec.granularity = Granularity::output_wise;
  int mixed = 0;
  for (int q = 0; q < 1000; ++q) {
    std::vector<BinaryReward> batch;
    for (std::uint64_t r = 0; r < 4; ++r) batch.push_back({"q" + std::to_string(q), r, 1});
    const auto out = flip_batch(batch, 0, spec);
    bool all_same = true;
    for (const auto& b : out) all_same = all_same && b.reward == out.front().reward;
    mixed += !all_same;
  }
  // all four agree with probability 1/8 under independent fair flips
  CHECK(mixed > 820);
  CHECK(mixed < 930);
}

TEST_CASE("true reward 1 under p = 0.4 is observed as 0.6 on average") {
  const auto spec = spec_with(0.4, 17);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += flip_batch({{"fixed", 0, 1}}, static_cast<std::uint64_t>(i), spec)[0].reward;
  CHECK(std::abs(sum / n - 0.6) < 0.01);
}

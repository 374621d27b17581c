#include <doctest.h>

#include <cmath>

#include "rewardkit/synthetic_rm.hpp"

using namespace rewardkit::synthetic_rm;

TEST_CASE("fits reach their targets analytically and by sampling") {
  for (const auto [acc, var] : {std::pair{0.85, 0.1937}, std::pair{0.75, 0.1161}, std::pair{0.65, 0.0672}}) {
    RmTargets t;
    t.accuracy = acc;
    t.variance = var;
    t.seed = 5;
    const auto rm = fit_synthetic_rm(t);
    CHECK(analytic_accuracy(rm) == doctest::Approx(acc).epsilon(1e-6));
    CHECK(analytic_variance(rm) == doctest::Approx(var).epsilon(1e-6));
    CHECK(rm.shape_a > rm.shape_b);
    const auto stats = monte_carlo_stats(rm, 100000, 1);
    CHECK(std::abs(stats.accuracy - acc) < kFitTolerance);
    CHECK(std::abs(stats.variance - var) < kFitTolerance);
  }
}

TEST_CASE("infeasible variance and accuracy are rejected") {
  RmTargets t;
  t.accuracy = 0.85;
  t.variance = 0.3;
  CHECK_THROWS_AS(fit_synthetic_rm(t), FitError);
  t.variance = 0.1;
  t.accuracy = 0.4;
  CHECK_THROWS_AS(fit_synthetic_rm(t), std::invalid_argument);
}

TEST_CASE("scores are deterministic per key and within [0, 1]") {
  RmTargets t;
  const auto rm = fit_synthetic_rm(t);
  for (int i = 0; i < 1000; ++i) {
    const auto key = "k" + std::to_string(i);
    const double s = synthetic_rm_score(i % 2, rm, key);
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
    CHECK(s == synthetic_rm_score(i % 2, rm, key));
  }
}

TEST_CASE("json round trip") {
  RmTargets t;
  t.accuracy = 0.75;
  t.variance = 0.1161;
  const auto rm = fit_synthetic_rm(t);
  const nlohmann::json j = rm;
  const auto back = j.get<SyntheticRmSpec>();
  CHECK(back.shape_a == rm.shape_a);
  CHECK(back.shape_b == rm.shape_b);
  CHECK(back.seed == rm.seed);
  CHECK(synthetic_rm_score(1, back, "x") == synthetic_rm_score(1, rm, "x"));
}

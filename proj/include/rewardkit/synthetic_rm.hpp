#pragma once

// Parametric stand-in for a trained reward model, characterized only by its
// classification accuracy (threshold 0.5) and the variance of its scores.
//
// Scores for correct responses follow Beta(a, b) with a > b; scores for
// incorrect responses follow the mirror image 1 - Beta(a, b). Over balanced
// labels the pooled mean is 0.5 and, writing m = a / (a + b), k = a + b,
//
//   pooled variance = m (1 - m) / (k + 1) + (m - 1/2)^2
//   accuracy        = P(Beta(a, b) > 1/2)
//
// For a target variance V in (0, 1/4) every m in (1/2, 1/2 + sqrt(V)) fixes k,
// and accuracy increases from 1/2 to 1 along that curve, so the fit is a
// one-dimensional root find in m.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace rewardkit::synthetic_rm {

struct RmTargets {
  double accuracy = 0.85;
  double variance = 0.1937;
  std::uint64_t seed = 0;
  int validation_draws = 100000;
};

struct SyntheticRmSpec {
  double target_accuracy = 0.0;
  double target_variance = 0.0;
  std::uint64_t seed = 0;
  double shape_a = 1.0;  // Beta shape of the correct-label component
  double shape_b = 1.0;
  double achieved_accuracy = 0.0;  // Monte Carlo, recorded at fit time
  double achieved_variance = 0.0;
  int validation_draws = 0;
};

inline constexpr double kFitTolerance = 0.02;

class FitError : public std::runtime_error {
 public:
  FitError(const std::string& what, double closest_variance)
      : std::runtime_error(what), closest_variance_(closest_variance) {}
  double closest_variance() const { return closest_variance_; }

 private:
  double closest_variance_;
};

struct ScoreStats {
  double accuracy = 0.0;
  double variance = 0.0;
  double mean_abs_deviation = 0.0;  // mean |s - 0.5|
};

/// Requires 0.5 < accuracy < 1 (std::invalid_argument otherwise). Throws
/// FitError when the variance is out of reach or the Monte Carlo check misses
/// either target by more than kFitTolerance.
SyntheticRmSpec fit_synthetic_rm(const RmTargets& targets);

/// Deterministic score keyed by (rm.seed, key).
double synthetic_rm_score(int true_label, const SyntheticRmSpec& rm, std::string_view key);

/// Exact accuracy of the fitted distribution (no sampling).
double analytic_accuracy(const SyntheticRmSpec& rm);
double analytic_variance(const SyntheticRmSpec& rm);

/// Balanced-label Monte Carlo statistics over `draws` scores; `stream`
/// selects an independent set of keys.
ScoreStats monte_carlo_stats(const SyntheticRmSpec& rm, int draws, std::uint64_t stream = 0);

void to_json(nlohmann::json& j, const SyntheticRmSpec& rm);
void from_json(const nlohmann::json& j, SyntheticRmSpec& rm);

}  // namespace rewardkit::synthetic_rm

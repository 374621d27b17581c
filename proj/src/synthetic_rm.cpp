#include "rewardkit/synthetic_rm.hpp"

#include <cmath>
#include <sstream>

#include <boost/math/special_functions/beta.hpp>

#include "rewardkit/prf.hpp"

namespace rewardkit::synthetic_rm {
namespace {

constexpr std::uint64_t kScoreStream = 0x726d7363;  // "rmsc"
constexpr std::uint64_t kMonteCarloStream = 0x726d6d63;

struct Shapes {
  double a;
  double b;
};

Shapes shapes_for(double mean, double variance) {
  const double spread = (mean - 0.5) * (mean - 0.5);
  const double concentration = mean * (1.0 - mean) / (variance - spread) - 1.0;
  return {mean * concentration, (1.0 - mean) * concentration};
}

double accuracy_of(const Shapes& s) { return boost::math::ibetac(s.a, s.b, 0.5); }

double draw(const Shapes& s, double u) { return boost::math::ibeta_inv(s.a, s.b, u); }

}  // namespace

SyntheticRmSpec fit_synthetic_rm(const RmTargets& targets) {
  if (!(targets.accuracy > 0.5 && targets.accuracy < 1.0)) {
    throw std::invalid_argument("target accuracy must lie strictly between 0.5 and 1");
  }
  if (targets.validation_draws < 1) throw std::invalid_argument("validation draws must be positive");
  const double v = targets.variance;
  if (!(v > 0.0 && v < 0.25)) {
    const double closest = v <= 0.0 ? 1e-6 : std::nextafter(0.25, 0.0);
    std::ostringstream msg;
    msg << "no bounded score distribution has variance " << v
        << " around mean 0.5; closest achievable variance is " << closest;
    throw FitError(msg.str(), closest);
  }

  // Accuracy rises monotonically in the component mean along the iso-variance
  // curve; bisect on the mean.
  const double half_width = std::sqrt(v);
  double lo = 0.5;
  double hi = 0.5 + half_width;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (accuracy_of(shapes_for(mid, v)) < targets.accuracy) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const Shapes shapes = shapes_for(0.5 * (lo + hi), v);

  SyntheticRmSpec rm;
  rm.target_accuracy = targets.accuracy;
  rm.target_variance = targets.variance;
  rm.seed = targets.seed;
  rm.shape_a = shapes.a;
  rm.shape_b = shapes.b;
  rm.validation_draws = targets.validation_draws;

  const auto stats = monte_carlo_stats(rm, targets.validation_draws);
  rm.achieved_accuracy = stats.accuracy;
  rm.achieved_variance = stats.variance;
  if (std::abs(stats.accuracy - targets.accuracy) > kFitTolerance ||
      std::abs(stats.variance - targets.variance) > kFitTolerance) {
    std::ostringstream msg;
    msg << "synthetic RM fit missed its targets: accuracy " << stats.accuracy << " (target "
        << targets.accuracy << "), variance " << stats.variance << " (target " << targets.variance << ")";
    throw FitError(msg.str(), analytic_variance(rm));
  }
  return rm;
}

double synthetic_rm_score(int true_label, const SyntheticRmSpec& rm, std::string_view key) {
  if (true_label != 0 && true_label != 1) throw std::invalid_argument("true label must be 0 or 1");
  const double u = prf::uniform(rm.seed ^ kScoreStream, prf::hash_id(key), 0);
  const double x = draw({rm.shape_a, rm.shape_b}, u);
  return true_label == 1 ? x : 1.0 - x;
}

double analytic_accuracy(const SyntheticRmSpec& rm) { return accuracy_of({rm.shape_a, rm.shape_b}); }

double analytic_variance(const SyntheticRmSpec& rm) {
  const double k = rm.shape_a + rm.shape_b;
  const double m = rm.shape_a / k;
  return m * (1.0 - m) / (k + 1.0) + (m - 0.5) * (m - 0.5);
}

ScoreStats monte_carlo_stats(const SyntheticRmSpec& rm, int draws, std::uint64_t stream) {
  const Shapes shapes{rm.shape_a, rm.shape_b};
  const std::uint64_t key = rm.seed ^ kMonteCarloStream;
  double sum = 0.0;
  double sum_sq = 0.0;
  double abs_dev = 0.0;
  long correct = 0;
  for (int i = 0; i < draws; ++i) {
    const int label = i % 2;
    const double x = draw(shapes, prf::uniform(key, stream, static_cast<std::uint64_t>(i)));
    const double s = label == 1 ? x : 1.0 - x;
    if ((s > 0.5) == (label == 1)) ++correct;
    sum += s;
    sum_sq += s * s;
    abs_dev += std::abs(s - 0.5);
  }
  const double n = static_cast<double>(draws);
  const double mean = sum / n;
  return ScoreStats{static_cast<double>(correct) / n, sum_sq / n - mean * mean, abs_dev / n};
}

void to_json(nlohmann::json& j, const SyntheticRmSpec& rm) {
  j = nlohmann::json{{"target_accuracy", rm.target_accuracy},
                     {"target_variance", rm.target_variance},
                     {"seed", rm.seed},
                     {"distribution", "beta_mirror"},
                     {"shape_a", rm.shape_a},
                     {"shape_b", rm.shape_b},
                     {"achieved_accuracy", rm.achieved_accuracy},
                     {"achieved_variance", rm.achieved_variance},
                     {"validation_draws", rm.validation_draws}};
}

void from_json(const nlohmann::json& j, SyntheticRmSpec& rm) {
  if (j.contains("distribution") && j.at("distribution") != "beta_mirror") {
    throw std::invalid_argument("unsupported synthetic RM distribution");
  }
  j.at("target_accuracy").get_to(rm.target_accuracy);
  j.at("target_variance").get_to(rm.target_variance);
  j.at("seed").get_to(rm.seed);
  j.at("shape_a").get_to(rm.shape_a);
  j.at("shape_b").get_to(rm.shape_b);
  rm.achieved_accuracy = j.value("achieved_accuracy", 0.0);
  rm.achieved_variance = j.value("achieved_variance", 0.0);
  rm.validation_draws = j.value("validation_draws", 0);
  if (!(rm.shape_a > 0.0 && rm.shape_b > 0.0)) throw std::invalid_argument("Beta shapes must be positive");
}

}  // namespace rewardkit::synthetic_rm

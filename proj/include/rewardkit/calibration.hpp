#pragma once

// Compensate low reward-model scores with the pattern reward of the thought
// text: s < tau  ->  s + alpha * rpr_on_think(output).

#include <optional>
#include <string_view>

#include "rewardkit/pattern_reward.hpp"

namespace rewardkit::calibration {

struct CalibrationSpec {
  double tau = 0.5;
  double alpha = 0.1;
  std::optional<double> cap;  // off by default; results are not re-clipped

  void validate() const;
};

enum class ScoreSource { neural_rm, synthetic_rm };

struct RewardSourceScore {
  double s = 0.0;
  ScoreSource source = ScoreSource::neural_rm;
};

struct CalibratedScore {
  double raw = 0.0;
  double rpr = 0.0;           // 0 when the score was not below tau
  double compensation = 0.0;  // alpha * rpr
  double calibrated = 0.0;
  bool compensated = false;
};

/// Throws std::invalid_argument when the score is outside [0, 1].
CalibratedScore calibrate(const RewardSourceScore& score, std::string_view full_output,
                          const CalibrationSpec& spec,
                          const pattern::PhraseLexicon& lexicon = pattern::PhraseLexicon::standard());

/// Same rule with a precomputed thought-text pattern reward.
CalibratedScore calibrate_with_rpr(double score, double think_rpr, const CalibrationSpec& spec);

}  // namespace rewardkit::calibration

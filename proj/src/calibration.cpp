#include "rewardkit/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rewardkit::calibration {

void CalibrationSpec::validate() const {
  if (!std::isfinite(tau) || tau < 0.0 || tau > 1.0) throw std::invalid_argument("tau must lie in [0, 1]");
  if (!std::isfinite(alpha) || alpha < 0.0) throw std::invalid_argument("alpha must be non-negative");
  if (cap && !std::isfinite(*cap)) throw std::invalid_argument("cap must be finite");
}

CalibratedScore calibrate_with_rpr(double score, double think_rpr, const CalibrationSpec& spec) {
  if (!std::isfinite(score) || score < 0.0 || score > 1.0) {
    throw std::invalid_argument("reward-model score must lie in [0, 1]");
  }
  CalibratedScore out;
  out.raw = score;
  out.calibrated = score;
  if (score < spec.tau) {
    out.compensated = true;
    out.rpr = think_rpr;
    out.compensation = spec.alpha * think_rpr;
    out.calibrated = score + out.compensation;
    if (spec.cap) out.calibrated = std::min(out.calibrated, std::max(*spec.cap, score));
  }
  return out;
}

CalibratedScore calibrate(const RewardSourceScore& score, std::string_view full_output,
                          const CalibrationSpec& spec, const pattern::PhraseLexicon& lexicon) {
  if (!(score.s < spec.tau)) return calibrate_with_rpr(score.s, 0.0, spec);
  return calibrate_with_rpr(score.s, pattern::rpr_on_think(full_output, lexicon).value(), spec);
}

}  // namespace rewardkit::calibration

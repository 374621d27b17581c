#pragma once

#include <optional>
#include <string_view>

namespace rewardkit {

/// Reward stacks, one per experimental arm: verification, verification with
/// flips, pattern reward alone, raw reward-model score, calibrated score.
enum class RewardMode { verify, verify_flip, rpr_only, rm, rm_calibrated };

inline std::string_view to_string(RewardMode m) {
  switch (m) {
    case RewardMode::verify: return "verify";
    case RewardMode::verify_flip: return "verify_flip";
    case RewardMode::rpr_only: return "rpr_only";
    case RewardMode::rm: return "rm";
    case RewardMode::rm_calibrated: return "rm_calibrated";
  }
  return "unknown";
}

inline std::optional<RewardMode> parse_reward_mode(std::string_view s) {
  for (auto m : {RewardMode::verify, RewardMode::verify_flip, RewardMode::rpr_only, RewardMode::rm,
                 RewardMode::rm_calibrated}) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

inline bool needs_ground_truth(RewardMode m) { return m == RewardMode::verify || m == RewardMode::verify_flip; }
inline bool needs_rm_score(RewardMode m) { return m == RewardMode::rm || m == RewardMode::rm_calibrated; }

}  // namespace rewardkit

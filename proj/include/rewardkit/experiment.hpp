#pragma once

// Named simulator experiments. Each profile fans out into arms; every arm
// writes one JSON-lines metrics file and the profile writes summary.json.
//
//   flip_sweep     bandit, verification reward flipped with p = 0, 0.1, ..., 0.5
//   rpr_only       reasoning chain trained on the pattern reward alone
//   rm_sweep       reasoning chain trained on synthetic RMs of 85/75/65% accuracy
//   rm_calibrated  the same RMs, raw versus pattern-calibrated

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "rewardkit/rl_sim.hpp"

namespace rewardkit::experiment {

struct ExperimentArm {
  std::string name;
  sim::SyntheticEnvSpec env;
  sim::RewardStack stack;
  sim::TrainerConfig trainer;
};

struct ArmSummary {
  std::string name;
  int steps = 0;
  double final_true_accuracy = 0.0;
  double final_greedy_accuracy = 0.0;
  double final_train_reward = 0.0;
  double final_mean_length = 0.0;
  double final_entropy = 0.0;
  double peak_true_accuracy = 0.0;
  int peak_step = 0;
  std::optional<int> first_step_length_over_limit;  // reasoning chain only
};

struct ExperimentSummary {
  std::string profile;
  std::vector<ArmSummary> arms;
};

struct ExperimentOptions {
  std::optional<std::filesystem::path> out_dir;  // nothing is written when absent
  std::uint64_t seed = 0;
  std::optional<int> max_steps;
};

class UnknownProfile : public std::invalid_argument {
 public:
  explicit UnknownProfile(std::string_view name);
};

const std::vector<std::string>& available_profiles();

/// Simulator defaults for each environment.
sim::TrainerConfig bandit_trainer();
sim::TrainerConfig chain_trainer();
sim::SyntheticEnvSpec default_bandit();
sim::SyntheticEnvSpec default_chain();

/// The (accuracy, variance) pairs the RM profiles fit.
struct RmProfile {
  double accuracy;
  double variance;
};
const std::vector<RmProfile>& rm_profiles();

std::vector<ExperimentArm> profile_arms(std::string_view profile, std::uint64_t seed);

ArmSummary summarize(const std::string& name, const sim::SyntheticEnvSpec& env,
                     const std::vector<sim::StepMetrics>& series);

ExperimentSummary run_experiment(std::string_view profile, const ExperimentOptions& options);

nlohmann::json metrics_to_json(const sim::StepMetrics& m);
nlohmann::json summary_to_json(const ExperimentSummary& s);

}  // namespace rewardkit::experiment

#pragma once

// Desk-scale PPO with GAE over the synthetic environments. One simulator step
// is one PPO batch update: batch_size questions, rollouts_per_question
// episodes each, terminal-only rewards produced by a configurable reward
// stack.

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rewardkit/calibration.hpp"
#include "rewardkit/environments.hpp"
#include "rewardkit/modes.hpp"
#include "rewardkit/noise.hpp"
#include "rewardkit/pattern_reward.hpp"
#include "rewardkit/synthetic_rm.hpp"

namespace rewardkit::sim {

struct TrainerConfig {
  double gae_lambda = 1.0;
  double gae_gamma = 1.0;
  double ppo_clip_ratio = 0.2;
  // The LLM-scale rates (1e-6 actor, 5e-6 critic) do not transfer to a
  // tabular policy; these converge the default bandit in well under 2,000 steps.
  double actor_lr = 0.1;
  double critic_lr = 0.1;
  int batch_size = 128;
  int rollouts_per_question = 4;
  int critic_warmup_steps = 20;
  int max_steps = 1500;
  int ppo_epochs = 1;
  double kl_coefficient = 0.0;  // kept for completeness; must stay 0
  int dataset_size = 8192;      // distinct question ids before a second epoch
  std::uint64_t seed = 0;

  void validate() const;
};

struct RewardStack {
  RewardMode mode = RewardMode::verify;
  noise::NoiseSpec noise;  // used by verify_flip
  calibration::CalibrationSpec calibration;
  std::optional<synthetic_rm::SyntheticRmSpec> rm;  // required by rm modes
};

struct Trajectory {
  std::vector<int> states;
  std::vector<int> actions;
  std::vector<double> log_probs;  // behaviour policy
  std::vector<double> values;     // critic estimate at each state
  EpisodeOutcome outcome;
  double reward = 0.0;            // terminal training reward
  std::vector<double> advantages;
  std::vector<double> returns;
};

struct StepMetrics {
  int step = 0;
  double train_reward = 0.0;
  double true_accuracy = 0.0;    // exact, noiseless
  double greedy_accuracy = 0.0;  // probability of the optimal initial decision
  double batch_accuracy = 0.0;   // sampled correctness in this batch
  double mean_length = 0.0;      // tokens-equivalent, uncapped
  double truncated_fraction = 0.0;
  double entropy = 0.0;          // mean over decisions in the batch
  bool actor_updated = false;
};

struct TrainingResult {
  std::vector<StepMetrics> series;
  PolicyState final_policy;
};

class TrainingDivergence : public std::runtime_error {
 public:
  TrainingDivergence(int step, const std::string& what)
      : std::runtime_error("step " + std::to_string(step) + ": " + what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

/// Generalized advantage estimation with V = 0 after the last step. Throws
/// std::domain_error on empty or mismatched sequences.
std::vector<double> gae_advantages(const std::vector<double>& rewards, const std::vector<double>& values,
                                   double lambda, double gamma);

/// d log softmax(logits)[action] / d logits.
std::vector<double> score_function_gradient(const std::vector<double>& logits, int action);

/// One PPO update over a batch with advantages and returns filled in. The
/// actor is left untouched while step < critic_warmup_steps. Throws
/// TrainingDivergence on a non-finite gradient.
PolicyState ppo_update(const PolicyState& policy, const std::vector<Trajectory>& batch,
                       const TrainerConfig& config, int step);

/// Mean squared error of the critic on the batch returns.
double critic_loss(const PolicyState& policy, const std::vector<Trajectory>& batch);

using MetricsSink = std::function<void(const StepMetrics&)>;

TrainingResult run_training(const SyntheticEnvSpec& env, const RewardStack& stack, const TrainerConfig& config,
                            const pattern::PhraseLexicon& lexicon = pattern::PhraseLexicon::standard(),
                            const MetricsSink& sink = {});

}  // namespace rewardkit::sim

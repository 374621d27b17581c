#pragma once

// Synthetic environments for the policy-gradient simulator.
//
// bandit           one state, one action per arm; arm a answers correctly with
//                  probability q_a. A stand-in for "which output pattern".
// reasoning_chain  at each state the policy either emits one more reasoning
//                  step (a sentence carrying one lexicon phrase) or answers.
//                  Answer accuracy grows concavely with the number of steps
//                  and saturates; outputs longer than the context limit are
//                  cut before the answer tag, so they can never be correct.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "rewardkit/pattern_reward.hpp"
#include "rewardkit/prf.hpp"

namespace rewardkit::sim {

enum class EnvKind { bandit, reasoning_chain };

struct BanditSpec {
  std::vector<double> success = {0.2, 0.8};
};

struct ChainSpec {
  int context_limit = 4096;  // tokens-equivalent
  int step_tokens = 256;
  int answer_tokens = 64;
  double base_accuracy = 0.05;
  double peak_accuracy = 0.8;
  double accuracy_scale = 3.0;  // steps to reach ~63% of the gain
  int horizon_factor = 2;       // generation horizon = factor * context_limit
  double initial_continue_logit = 0.0;
};

struct SyntheticEnvSpec {
  EnvKind kind = EnvKind::bandit;
  BanditSpec bandit;
  ChainSpec chain;

  void validate() const;
};

/// Tabular policy: softmax logits per state, one value estimate per state.
struct PolicyState {
  std::vector<std::vector<double>> logits;
  std::vector<double> values;

  friend bool operator==(const PolicyState&, const PolicyState&) = default;
};

std::vector<double> softmax(const std::vector<double>& logits);
double entropy(const std::vector<double>& probs);

/// How one sampled episode ended.
struct EpisodeOutcome {
  int steps_taken = 0;       // reasoning steps (chain) or 0 (bandit)
  int action = -1;           // bandit arm, -1 for the chain
  bool answered = false;     // the policy chose to answer
  bool within_limit = true;  // the answer fits in the context limit
  bool correct = false;      // noiseless correctness
  int length_tokens = 0;
};

class Environment {
 public:
  virtual ~Environment() = default;

  virtual int num_states() const = 0;
  virtual int num_actions(int state) const = 0;
  virtual int initial_state() const { return 0; }

  struct Transition {
    int next_state;
    bool done;
  };
  virtual Transition step(int state, int action) const = 0;

  /// Converts a finished action sequence into an outcome, sampling answer
  /// correctness from `rng`.
  virtual EpisodeOutcome finish(const std::vector<int>& states, const std::vector<int>& actions,
                                prf::Stream& rng) const = 0;

  /// Full model output for an outcome, in the "Assistant: <think> ... </think>
  /// <answer> \boxed{..} </answer>" layout; truncated outputs end inside the
  /// thought segment.
  virtual std::string render(const EpisodeOutcome& outcome) const = 0;

  /// Key identifying render(outcome) for memoization.
  virtual std::uint64_t render_key(const EpisodeOutcome& outcome) const = 0;

  /// Expected noiseless accuracy of the policy, computed exactly.
  virtual double expected_accuracy(const PolicyState& policy) const = 0;

  /// Probability of the noiselessly optimal decision at the initial state.
  virtual double greedy_accuracy(const PolicyState& policy) const = 0;

  virtual PolicyState initial_policy() const = 0;

  static constexpr const char* kGroundTruth = "42";
};

std::unique_ptr<Environment> make_environment(const SyntheticEnvSpec& spec,
                                              const pattern::PhraseLexicon& lexicon);

/// Accuracy of an answer given after `steps` reasoning steps, ignoring the
/// context limit.
double chain_step_accuracy(const ChainSpec& spec, int steps);

/// Largest number of reasoning steps after which an answer still fits.
int chain_max_fitting_steps(const ChainSpec& spec);

}  // namespace rewardkit::sim

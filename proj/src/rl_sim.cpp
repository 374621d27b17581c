#include "rewardkit/rl_sim.hpp"

#include <cmath>
#include <unordered_map>

#include "rewardkit/verifier.hpp"

namespace rewardkit::sim {

void TrainerConfig::validate() const {
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) throw std::invalid_argument("gae_lambda must lie in [0, 1]");
  if (!(gae_gamma >= 0.0 && gae_gamma <= 1.0)) throw std::invalid_argument("gae_gamma must lie in [0, 1]");
  if (!(ppo_clip_ratio > 0.0)) throw std::invalid_argument("ppo_clip_ratio must be positive");
  if (!(actor_lr > 0.0) || !(critic_lr > 0.0)) throw std::invalid_argument("learning rates must be positive");
  if (batch_size < 1 || rollouts_per_question < 1) throw std::invalid_argument("batch shape must be positive");
  if (critic_warmup_steps < 0 || max_steps < 1 || ppo_epochs < 1) {
    throw std::invalid_argument("step counts must be positive");
  }
  if (kl_coefficient != 0.0) throw std::invalid_argument("the simulator trains without a KL penalty");
  if (dataset_size < 1) throw std::invalid_argument("dataset_size must be positive");
}

std::vector<double> gae_advantages(const std::vector<double>& rewards, const std::vector<double>& values,
                                   double lambda, double gamma) {
  if (rewards.empty()) throw std::domain_error("gae: empty episode");
  if (rewards.size() != values.size()) throw std::domain_error("gae: rewards and values differ in length");
  std::vector<double> adv(rewards.size());
  double running = 0.0;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    const double next_value = i + 1 < values.size() ? values[i + 1] : 0.0;
    const double delta = rewards[i] + gamma * next_value - values[i];
    running = delta + gamma * lambda * running;
    adv[i] = running;
  }
  return adv;
}

std::vector<double> score_function_gradient(const std::vector<double>& logits, int action) {
  auto grad = softmax(logits);
  for (auto& g : grad) g = -g;
  grad[static_cast<std::size_t>(action)] += 1.0;
  return grad;
}

double critic_loss(const PolicyState& policy, const std::vector<Trajectory>& batch) {
  double loss = 0.0;
  std::size_t n = 0;
  for (const auto& traj : batch) {
    for (std::size_t t = 0; t < traj.states.size(); ++t) {
      const double err = policy.values[static_cast<std::size_t>(traj.states[t])] - traj.returns[t];
      loss += err * err;
      ++n;
    }
  }
  return n == 0 ? 0.0 : loss / static_cast<double>(n);
}

PolicyState ppo_update(const PolicyState& policy, const std::vector<Trajectory>& batch, const TrainerConfig& config,
                       int step) {
  if (batch.empty()) throw std::invalid_argument("ppo_update: empty batch");
  std::size_t decisions = 0;
  for (const auto& traj : batch) decisions += traj.states.size();
  const double inv_n = 1.0 / static_cast<double>(decisions);
  const bool update_actor = step >= config.critic_warmup_steps;

  PolicyState next = policy;
  for (int epoch = 0; epoch < config.ppo_epochs; ++epoch) {
    std::vector<std::vector<double>> actor_grad;
    for (const auto& row : next.logits) actor_grad.emplace_back(row.size(), 0.0);
    std::vector<double> critic_grad(next.values.size(), 0.0);

    for (const auto& traj : batch) {
      for (std::size_t t = 0; t < traj.states.size(); ++t) {
        const auto s = static_cast<std::size_t>(traj.states[t]);
        critic_grad[s] += (next.values[s] - traj.returns[t]) * inv_n;
        if (!update_actor) continue;
        const double adv = traj.advantages[t];
        if (adv == 0.0) continue;
        const auto probs = softmax(next.logits[s]);
        const auto a = static_cast<std::size_t>(traj.actions[t]);
        const double ratio = std::exp(std::log(probs[a]) - traj.log_probs[t]);
        // The clipped branch of min(ratio * A, clip(ratio) * A) has zero gradient.
        const bool clipped = (adv > 0.0 && ratio > 1.0 + config.ppo_clip_ratio) ||
                             (adv < 0.0 && ratio < 1.0 - config.ppo_clip_ratio);
        if (clipped) continue;
        const double scale = adv * ratio * inv_n;
        for (std::size_t j = 0; j < probs.size(); ++j) {
          actor_grad[s][j] += scale * ((j == a ? 1.0 : 0.0) - probs[j]);
        }
      }
    }

    for (std::size_t s = 0; s < next.values.size(); ++s) {
      if (!std::isfinite(critic_grad[s])) throw TrainingDivergence(step, "non-finite critic gradient");
      next.values[s] -= config.critic_lr * critic_grad[s];
    }
    if (!update_actor) continue;
    for (std::size_t s = 0; s < next.logits.size(); ++s) {
      for (std::size_t j = 0; j < next.logits[s].size(); ++j) {
        if (!std::isfinite(actor_grad[s][j])) throw TrainingDivergence(step, "non-finite actor gradient");
        next.logits[s][j] += config.actor_lr * actor_grad[s][j];  // gradient ascent on the surrogate
      }
    }
  }
  return next;
}

namespace {

struct CachedRewards {
  std::optional<double> verify;
  std::optional<double> rpr_full;
  std::optional<double> rpr_think;
};

class RewardEvaluator {
 public:
  RewardEvaluator(const Environment& env, const RewardStack& stack, const pattern::PhraseLexicon& lexicon)
      : env_(env), stack_(stack), lexicon_(lexicon) {
    if (needs_rm_score(stack.mode) && !stack.rm) {
      throw std::invalid_argument("reward-model modes need a fitted synthetic RM");
    }
    if (stack.mode == RewardMode::verify_flip) stack.noise.validate();
    if (stack.mode == RewardMode::rm_calibrated) stack.calibration.validate();
  }

  double operator()(const EpisodeOutcome& outcome, const std::string& question_id, std::uint64_t presentation,
                    std::uint64_t rollout_index, const std::string& episode_key) {
    switch (stack_.mode) {
      case RewardMode::verify:
        return verify(outcome);
      case RewardMode::verify_flip: {
        const double base = verify(outcome);
        const bool flip = stack_.noise.granularity == noise::Granularity::question_wise
                              ? noise::flip_decision(question_id, presentation, stack_.noise)
                              : noise::flip_decision_for_output(question_id, presentation, rollout_index,
                                                                stack_.noise);
        return flip ? 1.0 - base : base;
      }
      case RewardMode::rpr_only: {
        auto& entry = cache_[env_.render_key(outcome)];
        if (!entry.rpr_full) entry.rpr_full = pattern::rpr_score(env_.render(outcome), lexicon_).value();
        return *entry.rpr_full;
      }
      case RewardMode::rm:
        return synthetic_rm::synthetic_rm_score(outcome.correct ? 1 : 0, *stack_.rm, episode_key);
      case RewardMode::rm_calibrated: {
        const double s = synthetic_rm::synthetic_rm_score(outcome.correct ? 1 : 0, *stack_.rm, episode_key);
        if (!(s < stack_.calibration.tau)) return s;
        auto& entry = cache_[env_.render_key(outcome)];
        if (!entry.rpr_think) entry.rpr_think = pattern::rpr_on_think(env_.render(outcome), lexicon_).value();
        return calibration::calibrate_with_rpr(s, *entry.rpr_think, stack_.calibration).calibrated;
      }
    }
    return 0.0;
  }

 private:
  double verify(const EpisodeOutcome& outcome) {
    auto& entry = cache_[env_.render_key(outcome)];
    if (!entry.verify) {
      entry.verify = verifier::verify(env_.render(outcome), Environment::kGroundTruth, verifier::ExtractMode::boxed)
                         .reward;
    }
    return *entry.verify;
  }

  const Environment& env_;
  const RewardStack& stack_;
  const pattern::PhraseLexicon& lexicon_;
  std::unordered_map<std::uint64_t, CachedRewards> cache_;
};

int sample_categorical(const std::vector<double>& probs, double u) {
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

}  // namespace

TrainingResult run_training(const SyntheticEnvSpec& env_spec, const RewardStack& stack, const TrainerConfig& config,
                            const pattern::PhraseLexicon& lexicon, const MetricsSink& sink) {
  config.validate();
  const auto env = make_environment(env_spec, lexicon);
  RewardEvaluator rewards(*env, stack, lexicon);

  TrainingResult result;
  PolicyState policy = env->initial_policy();
  const auto episodes_per_step = static_cast<std::uint64_t>(config.batch_size) *
                                 static_cast<std::uint64_t>(config.rollouts_per_question);

  for (int step = 0; step < config.max_steps; ++step) {
    std::vector<Trajectory> batch;
    batch.reserve(episodes_per_step);
    StepMetrics m;
    m.step = step;
    std::size_t decisions = 0;

    for (int q = 0; q < config.batch_size; ++q) {
      const std::uint64_t draw_index = static_cast<std::uint64_t>(step) * config.batch_size + q;
      const std::uint64_t question = draw_index % static_cast<std::uint64_t>(config.dataset_size);
      const std::uint64_t presentation = draw_index / static_cast<std::uint64_t>(config.dataset_size);
      const std::string question_id = "q" + std::to_string(question);

      for (int r = 0; r < config.rollouts_per_question; ++r) {
        prf::Stream rng(config.seed, draw_index * config.rollouts_per_question + r);
        Trajectory traj;
        int state = env->initial_state();
        for (;;) {
          const auto probs = softmax(policy.logits[static_cast<std::size_t>(state)]);
          const int action = sample_categorical(probs, rng.next_uniform());
          traj.states.push_back(state);
          traj.actions.push_back(action);
          traj.log_probs.push_back(std::log(probs[static_cast<std::size_t>(action)]));
          traj.values.push_back(policy.values[static_cast<std::size_t>(state)]);
          m.entropy += entropy(probs);
          const auto next = env->step(state, action);
          if (next.done) break;
          state = next.next_state;
        }
        traj.outcome = env->finish(traj.states, traj.actions, rng);
        const std::string episode_key =
            std::to_string(config.seed) + ":" + std::to_string(step) + ":" + std::to_string(q) + ":" + std::to_string(r);
        traj.reward = rewards(traj.outcome, question_id, presentation, static_cast<std::uint64_t>(r), episode_key);

        std::vector<double> step_rewards(traj.states.size(), 0.0);
        step_rewards.back() = traj.reward;
        traj.advantages = gae_advantages(step_rewards, traj.values, config.gae_lambda, config.gae_gamma);
        traj.returns.resize(traj.advantages.size());
        for (std::size_t t = 0; t < traj.returns.size(); ++t) traj.returns[t] = traj.advantages[t] + traj.values[t];

        decisions += traj.states.size();
        m.train_reward += traj.reward;
        m.batch_accuracy += traj.outcome.correct ? 1.0 : 0.0;
        m.mean_length += traj.outcome.length_tokens;
        m.truncated_fraction += traj.outcome.within_limit ? 0.0 : 1.0;
        batch.push_back(std::move(traj));
      }
    }

    const double n = static_cast<double>(batch.size());
    m.train_reward /= n;
    m.batch_accuracy /= n;
    m.mean_length /= n;
    m.truncated_fraction /= n;
    m.entropy /= static_cast<double>(decisions);
    m.true_accuracy = env->expected_accuracy(policy);
    m.greedy_accuracy = env->greedy_accuracy(policy);
    m.actor_updated = step >= config.critic_warmup_steps;

    policy = ppo_update(policy, batch, config, step);
    if (sink) sink(m);
    result.series.push_back(m);
  }
  result.final_policy = std::move(policy);
  return result;
}

}  // namespace rewardkit::sim

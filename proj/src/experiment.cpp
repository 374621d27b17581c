#include "rewardkit/experiment.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace rewardkit::experiment {

UnknownProfile::UnknownProfile(std::string_view name)
    : std::invalid_argument([&] {
        std::string msg = "unknown experiment profile '" + std::string(name) + "'; available:";
        for (const auto& p : available_profiles()) msg += " " + p;
        return msg;
      }()) {}

const std::vector<std::string>& available_profiles() {
  static const std::vector<std::string> profiles = {"flip_sweep", "rpr_only", "rm_sweep", "rm_calibrated"};
  return profiles;
}

sim::TrainerConfig bandit_trainer() {
  sim::TrainerConfig c;
  c.actor_lr = 0.1;
  c.critic_lr = 0.1;
  c.max_steps = 1500;
  return c;
}

sim::TrainerConfig chain_trainer() {
  sim::TrainerConfig c;
  c.actor_lr = 30.0;
  c.critic_lr = 0.5;
  c.max_steps = 500;
  return c;
}

sim::SyntheticEnvSpec default_bandit() {
  sim::SyntheticEnvSpec env;
  env.kind = sim::EnvKind::bandit;
  env.bandit.success = {0.2, 0.8};
  return env;
}

sim::SyntheticEnvSpec default_chain() {
  sim::SyntheticEnvSpec env;
  env.kind = sim::EnvKind::reasoning_chain;
  return env;
}

const std::vector<RmProfile>& rm_profiles() {
  static const std::vector<RmProfile> profiles = {{0.85, 0.1937}, {0.75, 0.1161}, {0.65, 0.0672}};
  return profiles;
}

namespace {

std::string format_fixed(double v, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

synthetic_rm::SyntheticRmSpec fit_profile(const RmProfile& p, std::uint64_t seed) {
  synthetic_rm::RmTargets targets;
  targets.accuracy = p.accuracy;
  targets.variance = p.variance;
  targets.seed = seed;
  return synthetic_rm::fit_synthetic_rm(targets);
}

}  // namespace

std::vector<ExperimentArm> profile_arms(std::string_view profile, std::uint64_t seed) {
  std::vector<ExperimentArm> arms;
  if (profile == "flip_sweep") {
    for (int i = 0; i <= 5; ++i) {
      ExperimentArm arm;
      arm.name = "flip_p" + format_fixed(i / 10.0, 1);
      arm.env = default_bandit();
      arm.stack.mode = RewardMode::verify_flip;
      arm.stack.noise.p = i / 10.0;
      arm.stack.noise.seed = seed;
      arm.trainer = bandit_trainer();
      arm.trainer.seed = seed;
      arms.push_back(std::move(arm));
    }
  } else if (profile == "rpr_only") {
    for (const auto mode : {RewardMode::verify, RewardMode::rpr_only}) {
      ExperimentArm arm;
      arm.name = std::string(to_string(mode));
      arm.env = default_chain();
      arm.stack.mode = mode;
      arm.trainer = chain_trainer();
      arm.trainer.seed = seed;
      arms.push_back(std::move(arm));
    }
  } else if (profile == "rm_sweep" || profile == "rm_calibrated") {
    const bool calibrated = profile == "rm_calibrated";
    for (const auto& p : rm_profiles()) {
      const auto rm = fit_profile(p, seed);
      for (const auto mode : {RewardMode::rm, RewardMode::rm_calibrated}) {
        if (mode == RewardMode::rm_calibrated && !calibrated) continue;
        ExperimentArm arm;
        arm.name = std::string(to_string(mode)) + "_acc" + format_fixed(p.accuracy, 2);
        arm.env = default_chain();
        arm.stack.mode = mode;
        arm.stack.rm = rm;
        arm.trainer = chain_trainer();
        arm.trainer.seed = seed;
        arms.push_back(std::move(arm));
      }
    }
  } else {
    throw UnknownProfile(profile);
  }
  return arms;
}

ArmSummary summarize(const std::string& name, const sim::SyntheticEnvSpec& env,
                     const std::vector<sim::StepMetrics>& series) {
  ArmSummary s;
  s.name = name;
  s.steps = static_cast<int>(series.size());
  if (series.empty()) return s;
  const auto& last = series.back();
  s.final_true_accuracy = last.true_accuracy;
  s.final_greedy_accuracy = last.greedy_accuracy;
  s.final_train_reward = last.train_reward;
  s.final_mean_length = last.mean_length;
  s.final_entropy = last.entropy;
  for (const auto& m : series) {
    if (m.true_accuracy > s.peak_true_accuracy) {
      s.peak_true_accuracy = m.true_accuracy;
      s.peak_step = m.step;
    }
    if (env.kind == sim::EnvKind::reasoning_chain && !s.first_step_length_over_limit &&
        m.mean_length > env.chain.context_limit) {
      s.first_step_length_over_limit = m.step;
    }
  }
  return s;
}

nlohmann::json metrics_to_json(const sim::StepMetrics& m) {
  return nlohmann::json{{"step", m.step},
                        {"train_reward", m.train_reward},
                        {"true_accuracy", m.true_accuracy},
                        {"greedy_accuracy", m.greedy_accuracy},
                        {"batch_accuracy", m.batch_accuracy},
                        {"mean_length", m.mean_length},
                        {"truncated_fraction", m.truncated_fraction},
                        {"entropy", m.entropy},
                        {"actor_updated", m.actor_updated}};
}

nlohmann::json summary_to_json(const ExperimentSummary& s) {
  nlohmann::json arms = nlohmann::json::array();
  for (const auto& a : s.arms) {
    nlohmann::json j{{"name", a.name},
                     {"steps", a.steps},
                     {"final_true_accuracy", a.final_true_accuracy},
                     {"final_greedy_accuracy", a.final_greedy_accuracy},
                     {"final_train_reward", a.final_train_reward},
                     {"final_mean_length", a.final_mean_length},
                     {"final_entropy", a.final_entropy},
                     {"peak_true_accuracy", a.peak_true_accuracy},
                     {"peak_step", a.peak_step},
                     {"first_step_length_over_limit", nullptr}};
    if (a.first_step_length_over_limit) j["first_step_length_over_limit"] = *a.first_step_length_over_limit;
    arms.push_back(std::move(j));
  }
  return nlohmann::json{{"profile", s.profile}, {"arms", std::move(arms)}};
}

ExperimentSummary run_experiment(std::string_view profile, const ExperimentOptions& options) {
  auto arms = profile_arms(profile, options.seed);
  if (options.out_dir) std::filesystem::create_directories(*options.out_dir);

  ExperimentSummary summary;
  summary.profile = std::string(profile);
  for (auto& arm : arms) {
    if (options.max_steps) arm.trainer.max_steps = *options.max_steps;
    std::ofstream metrics;
    if (options.out_dir) {
      metrics.open(*options.out_dir / (arm.name + ".jsonl"));
      if (!metrics) throw std::runtime_error("cannot write metrics for arm " + arm.name);
      if (arm.stack.rm) {
        std::ofstream rm_out(*options.out_dir / (arm.name + ".rm.json"));
        rm_out << nlohmann::json(*arm.stack.rm).dump(2) << '\n';
      }
    }
    const auto sink = [&](const sim::StepMetrics& m) {
      if (metrics.is_open()) metrics << metrics_to_json(m).dump() << '\n';
    };
    const auto result = sim::run_training(arm.env, arm.stack, arm.trainer, pattern::PhraseLexicon::standard(), sink);
    summary.arms.push_back(summarize(arm.name, arm.env, result.series));
  }
  if (options.out_dir) {
    std::ofstream out(*options.out_dir / "summary.json");
    out << summary_to_json(summary).dump(2) << '\n';
  }
  return summary;
}

}  // namespace rewardkit::experiment

#include "rewardkit/environments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rewardkit/text.hpp"

namespace rewardkit::sim {

std::vector<double> softmax(const std::vector<double>& logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - top);
    total += p[i];
  }
  for (auto& x : p) x /= total;
  return p;
}

double entropy(const std::vector<double>& probs) {
  double h = 0.0;
  for (const double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

void SyntheticEnvSpec::validate() const {
  if (kind == EnvKind::bandit) {
    if (bandit.success.size() < 2) throw std::invalid_argument("bandit needs at least two arms");
    for (const double q : bandit.success) {
      if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("arm success probabilities must lie in [0, 1]");
    }
    return;
  }
  const auto& c = chain;
  if (c.context_limit < 1) throw std::invalid_argument("context limit must be at least 1");
  if (c.step_tokens < 1 || c.answer_tokens < 0) throw std::invalid_argument("token costs must be positive");
  if (c.horizon_factor < 1) throw std::invalid_argument("horizon factor must be at least 1");
  for (const double a : {c.base_accuracy, c.peak_accuracy}) {
    if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("chain accuracies must lie in [0, 1]");
  }
  if (!(c.accuracy_scale > 0.0)) throw std::invalid_argument("accuracy scale must be positive");
}

double chain_step_accuracy(const ChainSpec& spec, int steps) {
  return spec.base_accuracy +
         (spec.peak_accuracy - spec.base_accuracy) * (1.0 - std::exp(-steps / spec.accuracy_scale));
}

int chain_max_fitting_steps(const ChainSpec& spec) {
  return (spec.context_limit - spec.answer_tokens) / spec.step_tokens;
}

namespace {

constexpr const char* kWrongAnswer = "41";

std::string answer_block(bool correct) {
  return std::string("</think> <answer> The answer is \\boxed{") + (correct ? Environment::kGroundTruth : kWrongAnswer) +
         "} </answer>";
}

class BanditEnvironment final : public Environment {
 public:
  explicit BanditEnvironment(BanditSpec spec) : spec_(std::move(spec)) {
    best_ = static_cast<int>(std::max_element(spec_.success.begin(), spec_.success.end()) - spec_.success.begin());
  }

  int num_states() const override { return 1; }
  int num_actions(int) const override { return static_cast<int>(spec_.success.size()); }
  Transition step(int, int) const override { return {0, true}; }

  EpisodeOutcome finish(const std::vector<int>&, const std::vector<int>& actions, prf::Stream& rng) const override {
    EpisodeOutcome out;
    out.action = actions.front();
    out.answered = true;
    out.correct = rng.next_uniform() < spec_.success[static_cast<std::size_t>(out.action)];
    out.length_tokens = 1;
    return out;
  }

  std::string render(const EpisodeOutcome& o) const override {
    return "Assistant: <think> option " + std::to_string(o.action) + " " + answer_block(o.correct);
  }

  std::uint64_t render_key(const EpisodeOutcome& o) const override {
    return static_cast<std::uint64_t>(o.action) * 2 + (o.correct ? 1 : 0);
  }

  double expected_accuracy(const PolicyState& policy) const override {
    const auto p = softmax(policy.logits[0]);
    double acc = 0.0;
    for (std::size_t a = 0; a < p.size(); ++a) acc += p[a] * spec_.success[a];
    return acc;
  }

  double greedy_accuracy(const PolicyState& policy) const override {
    return softmax(policy.logits[0])[static_cast<std::size_t>(best_)];
  }

  PolicyState initial_policy() const override {
    return PolicyState{{std::vector<double>(spec_.success.size(), 0.0)}, {0.0}};
  }

 private:
  BanditSpec spec_;
  int best_ = 0;
};

// Actions: 0 = answer now, 1 = one more reasoning step.
class ChainEnvironment final : public Environment {
 public:
  static constexpr int kAnswer = 0;
  static constexpr int kContinue = 1;

  ChainEnvironment(ChainSpec spec, const pattern::PhraseLexicon& lexicon)
      : spec_(spec),
        horizon_steps_(std::max(1, spec.horizon_factor * spec.context_limit / spec.step_tokens)),
        max_fit_(chain_max_fitting_steps(spec)),
        phrases_(lexicon.phrases()) {
    best_steps_ = 0;
    for (int k = 0; k <= std::min(max_fit_, horizon_steps_ - 1); ++k) {
      if (chain_step_accuracy(spec_, k) > chain_step_accuracy(spec_, best_steps_)) best_steps_ = k;
    }
  }

  int num_states() const override { return horizon_steps_; }
  int num_actions(int) const override { return 2; }

  Transition step(int state, int action) const override {
    if (action == kAnswer) return {state, true};
    if (state + 1 >= horizon_steps_) return {state + 1, true};
    return {state + 1, false};
  }

  EpisodeOutcome finish(const std::vector<int>& states, const std::vector<int>& actions,
                        prf::Stream& rng) const override {
    EpisodeOutcome out;
    out.answered = actions.back() == kAnswer;
    out.steps_taken = states.back() + (out.answered ? 0 : 1);
    out.length_tokens = out.steps_taken * spec_.step_tokens + (out.answered ? spec_.answer_tokens : 0);
    out.within_limit = out.answered && out.length_tokens <= spec_.context_limit;
    const double u = rng.next_uniform();
    out.correct = out.within_limit && u < chain_step_accuracy(spec_, out.steps_taken);
    return out;
  }

  std::string render(const EpisodeOutcome& o) const override {
    std::string textout = "Assistant: <think>";
    int words = 2;
    const int limit = spec_.context_limit;
    for (int i = 0; i < o.steps_taken && words < limit; ++i) {
      const auto& phrase = phrases_[static_cast<std::size_t>(i) % phrases_.size()];
      const auto phrase_words = text::split_whitespace(phrase);
      for (const auto w : phrase_words) {
        if (words >= limit) break;
        textout += ' ';
        textout += w;
        ++words;
      }
      for (int j = static_cast<int>(phrase_words.size()); j < spec_.step_tokens && words < limit; ++j) {
        textout += " s" + std::to_string(i) + "w" + std::to_string(j);
        ++words;
      }
    }
    if (o.within_limit) textout += " " + answer_block(o.correct);
    return textout;
  }

  std::uint64_t render_key(const EpisodeOutcome& o) const override {
    return static_cast<std::uint64_t>(o.steps_taken) * 4 + (o.within_limit ? 2 : 0) + (o.correct ? 1 : 0);
  }

  double expected_accuracy(const PolicyState& policy) const override {
    double reach = 1.0;
    double acc = 0.0;
    for (int k = 0; k < horizon_steps_; ++k) {
      const double answer_p = softmax(policy.logits[static_cast<std::size_t>(k)])[kAnswer];
      if (k <= max_fit_) acc += reach * answer_p * chain_step_accuracy(spec_, k);
      reach *= 1.0 - answer_p;
    }
    return acc;
  }

  double greedy_accuracy(const PolicyState& policy) const override {
    const auto p = softmax(policy.logits[0]);
    return best_steps_ == 0 ? p[kAnswer] : p[kContinue];
  }

  PolicyState initial_policy() const override {
    PolicyState policy;
    policy.logits.assign(static_cast<std::size_t>(horizon_steps_), {0.0, spec_.initial_continue_logit});
    policy.values.assign(static_cast<std::size_t>(horizon_steps_), 0.0);
    return policy;
  }

 private:
  ChainSpec spec_;
  int horizon_steps_;
  int max_fit_;
  int best_steps_ = 0;
  std::vector<std::string> phrases_;
};

}  // namespace

std::unique_ptr<Environment> make_environment(const SyntheticEnvSpec& spec, const pattern::PhraseLexicon& lexicon) {
  spec.validate();
  if (spec.kind == EnvKind::bandit) return std::make_unique<BanditEnvironment>(spec.bandit);
  return std::make_unique<ChainEnvironment>(spec.chain, lexicon);
}

}  // namespace rewardkit::sim

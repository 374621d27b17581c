#include "rewardkit/noise.hpp"

#include <cmath>
#include <stdexcept>

#include "rewardkit/prf.hpp"

namespace rewardkit::noise {
namespace {

// Distinct stream tags keep question-level and output-level draws apart.
constexpr std::uint64_t kQuestionStream = 0x71756573;  // "ques"
constexpr std::uint64_t kOutputStream = 0x6f757470;    // "outp"

std::uint64_t presentation_key(std::uint64_t presentation, const NoiseSpec& spec) {
  return spec.resample == Resample::once_per_question ? 0 : presentation;
}

bool decide(double u, double p) { return u < p; }

}  // namespace

std::string_view to_string(Granularity g) {
  return g == Granularity::question_wise ? "question_wise" : "output_wise";
}

std::string_view to_string(Resample r) {
  return r == Resample::per_presentation ? "per_presentation" : "once_per_question";
}

std::optional<Granularity> parse_granularity(std::string_view s) {
  if (s == "question_wise") return Granularity::question_wise;
  if (s == "output_wise") return Granularity::output_wise;
  return std::nullopt;
}

std::optional<Resample> parse_resample(std::string_view s) {
  if (s == "per_presentation") return Resample::per_presentation;
  if (s == "once_per_question") return Resample::once_per_question;
  return std::nullopt;
}

void NoiseSpec::validate() const {
  if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
    throw std::invalid_argument("flip probability must lie in [0, 1]");
  }
}

bool flip_decision(std::string_view question_id, std::uint64_t presentation, const NoiseSpec& spec) {
  const auto q = prf::hash_id(question_id);
  const auto key = spec.seed ^ (kQuestionStream * 0x9E3779B97F4A7C15ULL);
  return decide(prf::uniform(key, q, presentation_key(presentation, spec)), spec.p);
}

bool flip_decision_for_output(std::string_view question_id, std::uint64_t presentation,
                              std::uint64_t rollout_index, const NoiseSpec& spec) {
  const auto q = prf::hash_id(question_id) ^ (rollout_index * 0xBF58476D1CE4E5B9ULL);
  const auto key = spec.seed ^ (kOutputStream * 0x9E3779B97F4A7C15ULL);
  return decide(prf::uniform(key, q, presentation_key(presentation, spec)), spec.p);
}

std::vector<BinaryReward> flip_batch(const std::vector<BinaryReward>& rewards, std::uint64_t presentation,
                                     const NoiseSpec& spec) {
  spec.validate();
  std::vector<BinaryReward> out;
  out.reserve(rewards.size());
  for (const auto& r : rewards) {
    if (r.reward != 0.0 && r.reward != 1.0) {
      throw std::domain_error("reward flip requires binary rewards, got " + std::to_string(r.reward));
    }
    const bool flip = spec.granularity == Granularity::question_wise
                          ? flip_decision(r.question_id, presentation, spec)
                          : flip_decision_for_output(r.question_id, presentation, r.rollout_index, spec);
    out.push_back(BinaryReward{r.question_id, r.rollout_index, flip ? 1.0 - r.reward : r.reward});
  }
  return out;
}

}  // namespace rewardkit::noise

#pragma once

// Seeded reward flipping. A flip turns reward 1 into 0 and 0 into 1 with
// probability p; decisions are pure functions of (seed, question, presentation)
// so that batches can be scored in any order or in parallel.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rewardkit::noise {

enum class Granularity { question_wise, output_wise };
enum class Resample { per_presentation, once_per_question };

std::string_view to_string(Granularity g);
std::string_view to_string(Resample r);
std::optional<Granularity> parse_granularity(std::string_view s);
std::optional<Resample> parse_resample(std::string_view s);

struct NoiseSpec {
  double p = 0.0;
  std::uint64_t seed = 0;
  Granularity granularity = Granularity::question_wise;
  Resample resample = Resample::per_presentation;

  void validate() const;
};

/// One question-level decision. Under `once_per_question` the presentation
/// index is ignored.
bool flip_decision(std::string_view question_id, std::uint64_t presentation, const NoiseSpec& spec);

/// Decision for a single rollout under `output_wise` granularity; an
/// independent stream from the question-level one.
bool flip_decision_for_output(std::string_view question_id, std::uint64_t presentation,
                              std::uint64_t rollout_index, const NoiseSpec& spec);

struct BinaryReward {
  std::string question_id;
  std::uint64_t rollout_index = 0;
  double reward = 0.0;
};

/// Throws std::domain_error when a reward is not exactly 0 or 1.
std::vector<BinaryReward> flip_batch(const std::vector<BinaryReward>& rewards, std::uint64_t presentation,
                                     const NoiseSpec& spec);

}  // namespace rewardkit::noise

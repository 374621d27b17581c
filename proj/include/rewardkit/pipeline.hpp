#pragma once

// Batch scoring: rollout records in, reward signals with full provenance out.
// JSON-lines is the wire format for both sides.

#include <cstdint>
#include <filesystem>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rewardkit/calibration.hpp"
#include "rewardkit/modes.hpp"
#include "rewardkit/noise.hpp"
#include "rewardkit/pattern_reward.hpp"
#include "rewardkit/verifier.hpp"

namespace rewardkit::pipeline {

struct RolloutRecord {
  std::string id;
  std::string question_id;
  std::string response_text;
  std::optional<std::string> ground_truth;
  std::optional<double> rm_score;
  std::optional<std::uint64_t> presentation;
};

struct StageValue {
  std::string stage;  // verify | flip | rpr | rm | calibrate
  double value = 0.0;

  friend bool operator==(const StageValue&, const StageValue&) = default;
};

/// Either a scored signal or an in-band error for one record.
struct RewardSignal {
  std::string id;
  double final_reward = 0.0;
  std::vector<StageValue> components;
  std::optional<std::string> failure;  // verifier failure code
  std::optional<std::string> error;    // set instead of a score for invalid records

  bool ok() const { return !error; }
};

struct PipelineConfig {
  RewardMode mode = RewardMode::verify;
  verifier::ExtractMode extraction = verifier::ExtractMode::boxed;
  noise::NoiseSpec noise;  // noise.seed mirrors `seed`
  calibration::CalibrationSpec calibration;
  std::optional<std::filesystem::path> lexicon_path;
  std::uint64_t seed = 0;

  void validate() const;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown for batch-level violations such as duplicate ids.
class BatchValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

PipelineConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const PipelineConfig& config);
PipelineConfig load_config(const std::filesystem::path& path);

/// A validated config plus its loaded lexicon; cheap to share across threads.
class Scorer {
 public:
  explicit Scorer(PipelineConfig config);

  const PipelineConfig& config() const { return config_; }
  const pattern::PhraseLexicon& lexicon() const { return *lexicon_; }

  /// Output order matches input order. Per-record problems come back as
  /// signals with `error` set; duplicate ids throw BatchValidationError.
  std::vector<RewardSignal> score_batch(const std::vector<RolloutRecord>& records) const;

 private:
  RewardSignal score_one(const RolloutRecord& record, std::uint64_t rollout_index) const;

  PipelineConfig config_;
  std::shared_ptr<const pattern::PhraseLexicon> lexicon_;
};

std::vector<RewardSignal> score_batch(const std::vector<RolloutRecord>& records, const PipelineConfig& config);

// --- JSON ---------------------------------------------------------------------

/// Parses one record object. `id` and `question_id` may be strings or
/// integers (integers are carried as their decimal text).
RolloutRecord record_from_json(const nlohmann::json& j);
nlohmann::json record_to_json(const RolloutRecord& r);
nlohmann::json signal_to_json(const RewardSignal& s);
RewardSignal signal_from_json(const nlohmann::json& j);

/// A record line that failed to parse keeps its line number and message.
struct RecordParseResult {
  std::vector<std::pair<std::size_t, RolloutRecord>> records;  // (line number, record)
  std::vector<std::pair<std::size_t, std::string>> errors;
};

RecordParseResult read_records(std::istream& in);

}  // namespace rewardkit::pipeline

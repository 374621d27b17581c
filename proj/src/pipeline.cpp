#include "rewardkit/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "rewardkit/text.hpp"

namespace rewardkit::pipeline {
namespace {

using nlohmann::json;

void reject_unknown_keys(const json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const auto a : allowed) known = known || key == a;
    if (!known) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

std::string id_text(const json& v, const char* field) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return v.dump();
  throw std::invalid_argument(std::string(field) + " must be a string or an integer");
}

}  // namespace

void PipelineConfig::validate() const {
  try {
    noise.validate();
    calibration.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

PipelineConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown_keys(j, {"mode", "extraction_mode", "seed", "noise", "calibration", "lexicon_path"}, "config");
  PipelineConfig c;
  try {
    if (j.contains("mode")) {
      const auto mode = parse_reward_mode(j.at("mode").get<std::string>());
      if (!mode) throw ConfigError("unknown mode '" + j.at("mode").get<std::string>() + "'");
      c.mode = *mode;
    }
    if (j.contains("extraction_mode")) {
      const auto m = verifier::parse_extract_mode(j.at("extraction_mode").get<std::string>());
      if (!m) throw ConfigError("extraction_mode must be boxed or answer_tag");
      c.extraction = *m;
    }
    c.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("noise")) {
      const auto& n = j.at("noise");
      reject_unknown_keys(n, {"p", "granularity", "resample"}, "noise");
      c.noise.p = n.value("p", 0.0);
      if (n.contains("granularity")) {
        const auto g = noise::parse_granularity(n.at("granularity").get<std::string>());
        if (!g) throw ConfigError("noise.granularity must be question_wise or output_wise");
        c.noise.granularity = *g;
      }
      if (n.contains("resample")) {
        const auto r = noise::parse_resample(n.at("resample").get<std::string>());
        if (!r) throw ConfigError("noise.resample must be per_presentation or once_per_question");
        c.noise.resample = *r;
      }
    }
    if (j.contains("calibration")) {
      const auto& cal = j.at("calibration");
      reject_unknown_keys(cal, {"tau", "alpha", "cap"}, "calibration");
      c.calibration.tau = cal.value("tau", 0.5);
      c.calibration.alpha = cal.value("alpha", 0.1);
      if (cal.contains("cap") && !cal.at("cap").is_null()) c.calibration.cap = cal.at("cap").get<double>();
    }
    if (j.contains("lexicon_path") && !j.at("lexicon_path").is_null()) {
      c.lexicon_path = j.at("lexicon_path").get<std::string>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  c.noise.seed = c.seed;
  c.validate();
  return c;
}

json config_to_json(const PipelineConfig& c) {
  json j{{"mode", to_string(c.mode)},
         {"extraction_mode", verifier::to_string(c.extraction)},
         {"seed", c.seed},
         {"noise",
          {{"p", c.noise.p},
           {"granularity", noise::to_string(c.noise.granularity)},
           {"resample", noise::to_string(c.noise.resample)}}},
         {"calibration", {{"tau", c.calibration.tau}, {"alpha", c.calibration.alpha}, {"cap", nullptr}}},
         {"lexicon_path", nullptr}};
  if (c.calibration.cap) j["calibration"]["cap"] = *c.calibration.cap;
  if (c.lexicon_path) j["lexicon_path"] = c.lexicon_path->string();
  return j;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  auto config = config_from_json(j);
  if (config.lexicon_path && config.lexicon_path->is_relative()) {
    config.lexicon_path = path.parent_path() / *config.lexicon_path;
  }
  return config;
}

Scorer::Scorer(PipelineConfig config) : config_(std::move(config)) {
  config_.noise.seed = config_.seed;
  config_.validate();
  if (config_.lexicon_path) {
    try {
      lexicon_ = std::make_shared<const pattern::PhraseLexicon>(pattern::PhraseLexicon::load(*config_.lexicon_path));
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
  } else {
    lexicon_ = std::shared_ptr<const pattern::PhraseLexicon>(&pattern::PhraseLexicon::standard(),
                                                             [](const pattern::PhraseLexicon*) {});
  }
}

RewardSignal Scorer::score_one(const RolloutRecord& record, std::uint64_t rollout_index) const {
  RewardSignal out;
  out.id = record.id;
  const auto mode = config_.mode;
  if (needs_ground_truth(mode) && (!record.ground_truth || text::trim(*record.ground_truth).empty())) {
    out.error = "record lacks ground_truth required by mode " + std::string(to_string(mode));
    return out;
  }
  if (needs_rm_score(mode)) {
    if (!record.rm_score) {
      out.error = "record lacks rm_score required by mode " + std::string(to_string(mode));
      return out;
    }
    if (!std::isfinite(*record.rm_score) || *record.rm_score < 0.0 || *record.rm_score > 1.0) {
      out.error = "rm_score must lie in [0, 1]";
      return out;
    }
  }

  switch (mode) {
    case RewardMode::verify:
    case RewardMode::verify_flip: {
      const auto outcome = verifier::verify(record.response_text, *record.ground_truth, config_.extraction);
      out.components.push_back({"verify", static_cast<double>(outcome.reward)});
      if (outcome.failure) out.failure = std::string(verifier::to_string(*outcome.failure));
      if (mode == RewardMode::verify_flip) {
        const double flipped =
            noise::flip_batch({{record.question_id, rollout_index, static_cast<double>(outcome.reward)}},
                              record.presentation.value_or(0), config_.noise)
                .front()
                .reward;
        out.components.push_back({"flip", flipped});
      }
      break;
    }
    case RewardMode::rpr_only:
      out.components.push_back({"rpr", pattern::rpr_score(record.response_text, *lexicon_).value()});
      break;
    case RewardMode::rm:
      out.components.push_back({"rm", *record.rm_score});
      break;
    case RewardMode::rm_calibrated: {
      out.components.push_back({"rm", *record.rm_score});
      const auto cal = calibration::calibrate({*record.rm_score, calibration::ScoreSource::neural_rm},
                                              record.response_text, config_.calibration, *lexicon_);
      out.components.push_back({"calibrate", cal.calibrated});
      break;
    }
  }
  out.final_reward = out.components.back().value;
  return out;
}

std::vector<RewardSignal> Scorer::score_batch(const std::vector<RolloutRecord>& records) const {
  std::unordered_set<std::string> ids;
  for (const auto& r : records) {
    if (!ids.insert(r.id).second) throw BatchValidationError("duplicate record id '" + r.id + "' in batch");
  }
  std::unordered_map<std::string, std::uint64_t> rollouts_seen;
  std::vector<RewardSignal> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    const std::uint64_t rollout_index = rollouts_seen[r.question_id]++;
    out.push_back(score_one(r, rollout_index));
  }
  return out;
}

std::vector<RewardSignal> score_batch(const std::vector<RolloutRecord>& records, const PipelineConfig& config) {
  return Scorer(config).score_batch(records);
}

RolloutRecord record_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("record must be a JSON object");
  RolloutRecord r;
  if (!j.contains("id")) throw std::invalid_argument("record lacks id");
  r.id = id_text(j.at("id"), "id");
  if (!j.contains("question_id")) throw std::invalid_argument("record lacks question_id");
  r.question_id = id_text(j.at("question_id"), "question_id");
  if (!j.contains("response_text") || !j.at("response_text").is_string()) {
    throw std::invalid_argument("record lacks a string response_text");
  }
  r.response_text = j.at("response_text").get<std::string>();
  if (j.contains("ground_truth") && !j.at("ground_truth").is_null()) {
    const auto& gt = j.at("ground_truth");
    r.ground_truth = gt.is_string() ? gt.get<std::string>() : gt.dump();
  }
  if (j.contains("rm_score") && !j.at("rm_score").is_null()) {
    if (!j.at("rm_score").is_number()) throw std::invalid_argument("rm_score must be a number");
    r.rm_score = j.at("rm_score").get<double>();
  }
  if (j.contains("presentation") && !j.at("presentation").is_null()) {
    if (!j.at("presentation").is_number_unsigned() && !j.at("presentation").is_number_integer()) {
      throw std::invalid_argument("presentation must be a non-negative integer");
    }
    const auto p = j.at("presentation").get<std::int64_t>();
    if (p < 0) throw std::invalid_argument("presentation must be a non-negative integer");
    r.presentation = static_cast<std::uint64_t>(p);
  }
  return r;
}

json record_to_json(const RolloutRecord& r) {
  json j{{"id", r.id}, {"question_id", r.question_id}, {"response_text", r.response_text}};
  if (r.ground_truth) j["ground_truth"] = *r.ground_truth;
  if (r.rm_score) j["rm_score"] = *r.rm_score;
  if (r.presentation) j["presentation"] = *r.presentation;
  return j;
}

json signal_to_json(const RewardSignal& s) {
  json j{{"id", s.id}};
  if (s.error) {
    j["error"] = *s.error;
    return j;
  }
  j["final"] = s.final_reward;
  j["components"] = json::array();
  for (const auto& c : s.components) j["components"].push_back({{"stage", c.stage}, {"value", c.value}});
  if (s.failure) j["failure"] = *s.failure;
  return j;
}

RewardSignal signal_from_json(const json& j) {
  RewardSignal s;
  s.id = j.at("id").is_null() ? std::string() : j.at("id").get<std::string>();
  if (j.contains("error")) {
    s.error = j.at("error").get<std::string>();
    return s;
  }
  s.final_reward = j.at("final").get<double>();
  for (const auto& c : j.at("components")) {
    s.components.push_back({c.at("stage").get<std::string>(), c.at("value").get<double>()});
  }
  if (j.contains("failure")) s.failure = j.at("failure").get<std::string>();
  return s;
}

RecordParseResult read_records(std::istream& in) {
  RecordParseResult result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      result.records.emplace_back(line_no, record_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      result.errors.emplace_back(line_no, e.what());
    }
  }
  return result;
}

}  // namespace rewardkit::pipeline

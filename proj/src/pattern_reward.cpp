#include "rewardkit/pattern_reward.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "rewardkit/text.hpp"

namespace rewardkit::pattern {
namespace {

// Verbatim from the reference reward, including the "makes sence" spelling and
// the trailing spaces on the two "we can ..." phrases.
const std::vector<std::string>& standard_phrases() {
  static const std::vector<std::string> phrases = {
      "i need to",     "we need to",     "wait",          "alternatively",  "let me check",
      "let me see",    "let's focus on", "we know that",  "we can observe ", "we can see ",
      "let me try",    "let's try",      "let us try",    "first,",         "firstly,",
      "next,",         "finally,",       "let us first",  "let's first",    "let me first",
      "try again",     "still not",      "not working",   "not correct",    "does not work",
      "doesn't work",  "makes sence",    "since we",      "because we",     "consequently",
      "as a result",   "thus",           "therefore",     "hence",          "so that",
      "thereby",       "if we",          "given there",   "for instance",   "for example",
  };
  return phrases;
}

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  std::size_t count = 0;
  for (auto pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++count;
  }
  return count;
}

}  // namespace

PhraseLexicon::PhraseLexicon(std::vector<std::string> phrases)
    : PhraseLexicon(phrases, phrases.empty() ? Rational(0) : Rational(1, phrases.size())) {}

PhraseLexicon::PhraseLexicon(std::vector<std::string> phrases, Rational per_phrase_value)
    : value_(std::move(per_phrase_value)) {
  if (phrases.empty()) throw std::invalid_argument("phrase lexicon must not be empty");
  if (value_ <= 0 || value_ > 1) throw std::invalid_argument("per-phrase value must lie in (0, 1]");
  std::unordered_set<std::string> seen;
  for (auto& phrase : phrases) {
    auto lowered = text::to_lower(phrase);
    if (lowered.empty()) throw std::invalid_argument("phrase lexicon contains an empty phrase");
    if (!seen.insert(lowered).second) {
      throw std::invalid_argument("duplicate phrase in lexicon: " + lowered);
    }
    phrases_.push_back(std::move(lowered));
  }
}

const PhraseLexicon& PhraseLexicon::standard() {
  static const PhraseLexicon lexicon(standard_phrases());
  return lexicon;
}

PhraseLexicon PhraseLexicon::parse(std::string_view contents) {
  std::vector<std::string> phrases;
  std::size_t start = 0;
  while (start <= contents.size()) {
    auto end = contents.find('\n', start);
    if (end == std::string_view::npos) end = contents.size();
    const auto line = text::trim(contents.substr(start, end - start));
    if (!line.empty()) phrases.emplace_back(line);
    start = end + 1;
  }
  return PhraseLexicon(std::move(phrases));
}

PhraseLexicon PhraseLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open lexicon file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

std::vector<std::string> phrase_hits(std::string_view text, const PhraseLexicon& lexicon) {
  const auto lowered = text::to_lower(text);
  std::vector<std::string> hits;
  for (const auto& phrase : lexicon.phrases()) {
    if (lowered.find(phrase) != std::string::npos) hits.push_back(phrase);
  }
  return hits;
}

Rational ngram_repetition_penalty(std::string_view text, int n) {
  if (n < 1) throw std::invalid_argument("n-gram window must be at least 1");
  const auto words = text::split_whitespace(text);
  const auto window = static_cast<std::size_t>(n);
  if (words.size() < window) return Rational(0);

  std::unordered_map<std::string_view, std::uint32_t> ids;
  std::vector<std::uint32_t> tokens;
  tokens.reserve(words.size());
  for (const auto w : words) {
    tokens.push_back(ids.try_emplace(w, static_cast<std::uint32_t>(ids.size())).first->second);
  }

  const std::size_t positions = tokens.size() - window + 1;
  std::unordered_map<std::string, std::uint32_t> counts;
  counts.reserve(positions);
  std::string key(window * sizeof(std::uint32_t), '\0');
  std::size_t repeated = 0;
  for (std::size_t i = 0; i < positions; ++i) {
    std::memcpy(key.data(), tokens.data() + i, key.size());
    if (++counts[key] == 2) ++repeated;
  }
  return Rational(repeated, positions);
}

RprScore rpr_score(std::string_view text, const PhraseLexicon& lexicon, int penalty_n,
                   HitCounting counting) {
  const auto lowered = text::to_lower(text);
  RprScore score;
  for (const auto& phrase : lexicon.phrases()) {
    const auto count = counting == HitCounting::presence
                           ? std::size_t{lowered.find(phrase) != std::string::npos}
                           : count_occurrences(lowered, phrase);
    if (count > 0) {
      score.hits.push_back(phrase);
      score.hit_count += count;
    }
  }
  score.raw = Rational(score.hit_count) * lexicon.per_phrase_value();
  score.penalty = ngram_repetition_penalty(lowered, penalty_n);
  Rational net = score.raw - score.penalty;
  if (net < 0) net = 0;
  if (net > 1) net = 1;
  score.final_score = net;
  return score;
}

std::string_view think_segment(std::string_view full_output) {
  const auto marker = full_output.find(kThinkMarker);
  if (marker == std::string_view::npos) return {};
  auto start = marker + kThinkMarker.size();
  if (start < full_output.size() && full_output[start] == ' ') ++start;
  const auto rest = full_output.substr(start);
  const auto close = rest.find("</think>");
  return close == std::string_view::npos ? rest : rest.substr(0, close);
}

RprScore rpr_on_think(std::string_view full_output, const PhraseLexicon& lexicon, int penalty_n) {
  return rpr_score(think_segment(full_output), lexicon, penalty_n);
}

}  // namespace rewardkit::pattern

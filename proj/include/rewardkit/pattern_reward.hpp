#pragma once

// Reasoning pattern reward: score a text by which pre-identified reasoning
// phrases it contains, minus an n-gram repetition penalty, bounded to [0, 1].

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "rewardkit/rational.hpp"

namespace rewardkit::pattern {

/// How phrase matches turn into hit counts. `presence` counts each distinct
/// phrase once; `occurrences` counts every non-overlapping occurrence.
enum class HitCounting { presence, occurrences };

class PhraseLexicon {
 public:
  /// Each phrase is worth 1/n where n is the number of phrases.
  explicit PhraseLexicon(std::vector<std::string> phrases);
  PhraseLexicon(std::vector<std::string> phrases, Rational per_phrase_value);

  /// The 40 phrases of the published reference reward, r = 1/40.
  static const PhraseLexicon& standard();

  /// One phrase per line, lines trimmed, blank lines skipped.
  static PhraseLexicon load(const std::filesystem::path& path);
  static PhraseLexicon parse(std::string_view contents);

  const std::vector<std::string>& phrases() const { return phrases_; }
  const Rational& per_phrase_value() const { return value_; }
  std::size_t size() const { return phrases_.size(); }

 private:
  std::vector<std::string> phrases_;
  Rational value_;
};

struct RprScore {
  std::vector<std::string> hits;  // lexicon order
  std::size_t hit_count = 0;      // equals hits.size() under presence counting
  Rational raw;
  Rational penalty;
  Rational final_score;

  double value() const { return to_double(final_score); }
};

inline constexpr int kDefaultPenaltyWindow = 20;
inline constexpr std::string_view kThinkMarker = "Assistant: <think>";

/// Phrases occurring as case-insensitive substrings of `text`, in lexicon
/// order. No word boundaries: "waited" contains "wait".
std::vector<std::string> phrase_hits(std::string_view text, const PhraseLexicon& lexicon);

/// Distinct length-n word windows seen more than once, divided by the number
/// of window positions. Zero when the text has fewer than n words.
Rational ngram_repetition_penalty(std::string_view text, int n);

RprScore rpr_score(std::string_view text, const PhraseLexicon& lexicon,
                   int penalty_n = kDefaultPenaltyWindow,
                   HitCounting counting = HitCounting::presence);

/// Thought segment of a full model output: after "Assistant: <think>" (and one
/// following space) up to "</think>", or to the end when the tag never closes.
/// Empty when the marker is missing.
std::string_view think_segment(std::string_view full_output);

RprScore rpr_on_think(std::string_view full_output, const PhraseLexicon& lexicon,
                      int penalty_n = kDefaultPenaltyWindow);

}  // namespace rewardkit::pattern

#pragma once

// Rule-based answer verification for math-style outputs: pull the final
// answer out of a response, normalize it, compare with the ground truth.

#include <optional>
#include <string>
#include <string_view>

#include "rewardkit/rational.hpp"

namespace rewardkit::verifier {

enum class ExtractMode { boxed, answer_tag };

enum class VerifyFailure { no_answer_found, unbalanced_markup, truncated_output };

std::string_view to_string(ExtractMode mode);
std::string_view to_string(VerifyFailure failure);
std::optional<ExtractMode> parse_extract_mode(std::string_view s);

/// Comparison form of an answer. Numeric answers carry an exact value; the
/// text is the rendering used for non-numeric comparison and for display.
struct CanonicalAnswer {
  std::optional<Rational> value;
  std::string text;

  friend bool operator==(const CanonicalAnswer&, const CanonicalAnswer&) = default;
};

struct ExtractedAnswer {
  std::string raw;
  CanonicalAnswer canonical;
  ExtractMode source;
};

/// Extraction either yields an answer or says why none was found.
struct Extraction {
  std::optional<ExtractedAnswer> answer;
  std::optional<VerifyFailure> failure;
};

struct VerificationOutcome {
  int reward = 0;
  bool matched = false;
  std::optional<VerifyFailure> failure;
};

/// Version tag of the normalization rule table below. Bump on any rule change.
inline constexpr std::string_view kNormalizationVersion = "2";

Extraction extract_detailed(std::string_view response, ExtractMode mode);

std::optional<ExtractedAnswer> extract_answer(std::string_view response, ExtractMode mode);

CanonicalAnswer normalize_answer(std::string_view raw);

/// Rationals compare exactly; text compares as strings; a number never
/// equals a non-number.
bool answers_equal(const CanonicalAnswer& a, const CanonicalAnswer& b);

VerificationOutcome verify(std::string_view response, std::string_view ground_truth, ExtractMode mode);

}  // namespace rewardkit::verifier

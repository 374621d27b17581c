#include "rewardkit/verifier.hpp"

#include <array>
#include <regex>
#include <stdexcept>

#include "rewardkit/text.hpp"

namespace rewardkit::verifier {
namespace {

constexpr std::string_view kBoxCommand = "\\boxed";
constexpr std::string_view kAnswerOpen = "<answer>";
constexpr std::string_view kAnswerClose = "</answer>";
constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";

// Normalization rule table (version kNormalizationVersion).
//
//   dropped commands     \left \right \displaystyle \, \! \; \: "\ " \circ
//   wrappers -> content  \text \textbf \textit \textrm \mathrm \mathbf \mathit
//                        \mbox \operatorname \boxed \fbox
//   renamed              \dfrac \tfrac -> \frac
//   delimiters stripped  $..$  $$..$$  \(..\)  \[..\]
//   numbers              a/b, \frac{a}{b}, \frac12, decimals, 1e3, 1,000
//                        -> exact rational; a trailing period is dropped
//   everything else      lowercase, whitespace collapsed
constexpr std::array kDroppedCommands = {
    std::string_view("left"), std::string_view("right"), std::string_view("displaystyle"),
    std::string_view("circ")};
constexpr std::array kWrapperCommands = {
    std::string_view("text"),   std::string_view("textbf"), std::string_view("textit"),
    std::string_view("textrm"), std::string_view("mathrm"), std::string_view("mathbf"),
    std::string_view("mathit"), std::string_view("mbox"),   std::string_view("operatorname"),
    std::string_view("boxed"),  std::string_view("fbox")};
constexpr std::array kDelimiters = {
    std::pair{std::string_view("$$"), std::string_view("$$")},
    std::pair{std::string_view("$"), std::string_view("$")},
    std::pair{std::string_view("\\("), std::string_view("\\)")},
    std::pair{std::string_view("\\["), std::string_view("\\]")}};

bool is_letter(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

template <std::size_t N>
bool contains(const std::array<std::string_view, N>& table, std::string_view name) {
  for (const auto entry : table) {
    if (entry == name) return true;
  }
  return false;
}

// Index one past the '}' matching the '{' at `open`, or npos when the text
// ends first. Escaped braces are literal.
std::size_t match_brace(std::string_view s, std::size_t open) {
  int depth = 0;
  for (std::size_t i = open; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '\\' && i + 1 < s.size() && (s[i + 1] == '{' || s[i + 1] == '}')) {
      ++i;
      continue;
    }
    if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string_view::npos;
}

bool has_open_think(std::string_view response) {
  const auto open = response.rfind(kThinkOpen);
  if (open == std::string_view::npos) return false;
  return response.find(kThinkClose, open) == std::string_view::npos;
}

Extraction failed(std::string_view response, VerifyFailure failure) {
  if (failure == VerifyFailure::no_answer_found && has_open_think(response)) {
    failure = VerifyFailure::truncated_output;
  }
  return Extraction{std::nullopt, failure};
}

Extraction make_answer(std::string_view response, std::string_view content, ExtractMode mode) {
  if (text::trim(content).empty()) return failed(response, VerifyFailure::no_answer_found);
  ExtractedAnswer answer{std::string(content), normalize_answer(content), mode};
  return Extraction{std::move(answer), std::nullopt};
}

Extraction extract_boxed(std::string_view response) {
  const auto at = response.rfind(kBoxCommand);
  if (at == std::string_view::npos) return failed(response, VerifyFailure::no_answer_found);
  std::size_t pos = at + kBoxCommand.size();
  while (pos < response.size() && (response[pos] == ' ' || response[pos] == '\t')) ++pos;
  if (pos >= response.size()) return failed(response, VerifyFailure::truncated_output);
  if (response[pos] != '{') return failed(response, VerifyFailure::unbalanced_markup);
  const auto end = match_brace(response, pos);
  if (end == std::string_view::npos) return failed(response, VerifyFailure::truncated_output);
  return make_answer(response, response.substr(pos + 1, end - pos - 2), ExtractMode::boxed);
}

Extraction extract_tagged(std::string_view response) {
  const auto close = response.rfind(kAnswerClose);
  const auto last_open = response.rfind(kAnswerOpen);
  if (last_open != std::string_view::npos && (close == std::string_view::npos || last_open > close)) {
    return failed(response, VerifyFailure::truncated_output);
  }
  if (close == std::string_view::npos) return failed(response, VerifyFailure::no_answer_found);
  if (last_open == std::string_view::npos) return failed(response, VerifyFailure::unbalanced_markup);
  const auto begin = last_open + kAnswerOpen.size();
  return make_answer(response, response.substr(begin, close - begin), ExtractMode::answer_tag);
}

std::string strip_delimiters(std::string s) {
  bool changed = true;
  while (changed) {
    changed = false;
    const auto trimmed = std::string(text::trim(s));
    if (trimmed != s) {
      s = trimmed;
      changed = true;
    }
    for (const auto& [open, close] : kDelimiters) {
      if (s.size() >= open.size() + close.size() && s.starts_with(open) && s.ends_with(close)) {
        s = s.substr(open.size(), s.size() - open.size() - close.size());
        changed = true;
        break;
      }
    }
  }
  return s;
}

// One pass over LaTeX commands: drop spacing/sizing commands, unwrap textual
// wrappers, rename fraction variants.
std::string rewrite_commands(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '\\' || i + 1 >= s.size()) {
      out.push_back(s[i++]);
      continue;
    }
    const char next = s[i + 1];
    if (next == ',' || next == '!' || next == ';' || next == ':' || next == ' ') {
      i += 2;
      continue;
    }
    if (!is_letter(next)) {
      out.push_back(s[i++]);
      continue;
    }
    std::size_t j = i + 1;
    while (j < s.size() && is_letter(s[j])) ++j;
    const auto name = s.substr(i + 1, j - i - 1);
    if (contains(kDroppedCommands, name)) {
      i = j;
      continue;
    }
    if (contains(kWrapperCommands, name) && j < s.size() && s[j] == '{') {
      const auto end = match_brace(s, j);
      if (end != std::string_view::npos) {
        out.append(s.substr(j + 1, end - j - 2));
        i = end;
        continue;
      }
    }
    if (name == "dfrac" || name == "tfrac") {
      out.append("\\frac");
    } else {
      out.append(s.substr(i, j - i));
    }
    i = j;
  }
  return out;
}

std::string without_spaces(std::string_view s) {
  std::string out;
  for (const auto w : text::split_whitespace(s)) out.append(w);
  return out;
}

std::optional<Rational> parse_latex_fraction(std::string_view s) {
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  if (!s.starts_with("\\frac")) return std::nullopt;
  s.remove_prefix(5);
  std::optional<Rational> num;
  std::optional<Rational> den;
  if (s.size() == 2 && s[0] >= '0' && s[0] <= '9' && s[1] >= '0' && s[1] <= '9') {
    num = parse_decimal(s.substr(0, 1));
    den = parse_decimal(s.substr(1, 1));
  } else {
    if (s.empty() || s.front() != '{') return std::nullopt;
    const auto num_end = match_brace(s, 0);
    if (num_end == std::string_view::npos || num_end >= s.size() || s[num_end] != '{') return std::nullopt;
    const auto den_end = match_brace(s, num_end);
    if (den_end != s.size()) return std::nullopt;
    num = parse_rational(s.substr(1, num_end - 2));
    den = parse_rational(s.substr(num_end + 1, den_end - num_end - 2));
  }
  if (!num || !den || *den == 0) return std::nullopt;
  Rational value = *num / *den;
  return negative ? Rational(-value) : value;
}

std::optional<Rational> parse_numeric(std::string_view compact) {
  static const std::regex kThousands(R"([+-]?\d{1,3}(,\d{3})+(\.\d+)?)");
  std::string candidate(compact);
  if (candidate.size() > 1 && candidate.back() == '.') candidate.pop_back();
  if (std::regex_match(candidate, kThousands)) {
    std::erase(candidate, ',');
  }
  if (auto value = parse_rational(candidate)) return value;
  return parse_latex_fraction(candidate);
}

CanonicalAnswer normalize_once(std::string_view raw) {
  std::string s = strip_delimiters(std::string(raw));
  s = rewrite_commands(s);
  s = strip_delimiters(s);
  if (auto value = parse_numeric(without_spaces(s))) {
    return CanonicalAnswer{*value, render_rational(*value)};
  }
  s = text::collapse_whitespace(text::to_lower(s));
  if (s.size() > 1 && s.back() == '.') s.pop_back();
  return CanonicalAnswer{std::nullopt, strip_delimiters(s)};
}

}  // namespace

std::string_view to_string(ExtractMode mode) {
  return mode == ExtractMode::boxed ? "boxed" : "answer_tag";
}

std::string_view to_string(VerifyFailure failure) {
  switch (failure) {
    case VerifyFailure::no_answer_found: return "no_answer_found";
    case VerifyFailure::unbalanced_markup: return "unbalanced_markup";
    case VerifyFailure::truncated_output: return "truncated_output";
  }
  return "unknown";
}

std::optional<ExtractMode> parse_extract_mode(std::string_view s) {
  if (s == "boxed") return ExtractMode::boxed;
  if (s == "answer_tag") return ExtractMode::answer_tag;
  return std::nullopt;
}

Extraction extract_detailed(std::string_view response, ExtractMode mode) {
  return mode == ExtractMode::boxed ? extract_boxed(response) : extract_tagged(response);
}

std::optional<ExtractedAnswer> extract_answer(std::string_view response, ExtractMode mode) {
  return extract_detailed(response, mode).answer;
}

CanonicalAnswer normalize_answer(std::string_view raw) {
  // Iterate the single pass to a fixpoint so that normalization is idempotent
  // even when one rewrite exposes another (e.g. "\te\,xt{a}").
  CanonicalAnswer current = normalize_once(raw);
  for (int i = 0; i < 16 && !current.value; ++i) {
    CanonicalAnswer next = normalize_once(current.text);
    if (next == current) break;
    current = std::move(next);
  }
  return current;
}

bool answers_equal(const CanonicalAnswer& a, const CanonicalAnswer& b) {
  if (a.value.has_value() != b.value.has_value()) return false;
  if (a.value) return *a.value == *b.value;
  return a.text == b.text;
}

VerificationOutcome verify(std::string_view response, std::string_view ground_truth, ExtractMode mode) {
  if (text::trim(ground_truth).empty()) {
    throw std::invalid_argument("verify: ground truth must be nonempty");
  }
  const auto extraction = extract_detailed(response, mode);
  if (!extraction.answer) return VerificationOutcome{0, false, extraction.failure};
  const bool matched = answers_equal(extraction.answer->canonical, normalize_answer(ground_truth));
  return VerificationOutcome{matched ? 1 : 0, matched, std::nullopt};
}

}  // namespace rewardkit::verifier

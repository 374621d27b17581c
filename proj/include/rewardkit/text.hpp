#pragma once

// UTF-8 text helpers shared by the verifier and the pattern reward.
//
// Whitespace splitting follows the unicode whitespace set used by Python's
// str.split(); lowercasing covers ASCII, Latin-1, Greek and Cyrillic capitals.
// Bytes that do not decode as UTF-8 are passed through untouched.

#include <string>
#include <string_view>
#include <vector>

namespace rewardkit::text {

std::string to_lower(std::string_view s);
std::string to_upper_ascii(std::string_view s);

bool is_space_codepoint(char32_t cp);

std::vector<std::string_view> split_whitespace(std::string_view s);

std::string_view trim(std::string_view s);
std::string collapse_whitespace(std::string_view s);

bool starts_with_at(std::string_view s, std::size_t pos, std::string_view needle);

}  // namespace rewardkit::text

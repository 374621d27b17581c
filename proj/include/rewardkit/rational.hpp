#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace rewardkit {

/// Exact arbitrary-precision rational used for answer comparison and reward
/// arithmetic.
using Rational = boost::multiprecision::cpp_rational;

double to_double(const Rational& r);

/// Parses "[+-]digits[.digits][e[+-]digits]" exactly. No surrounding
/// whitespace is accepted.
std::optional<Rational> parse_decimal(std::string_view s);

/// Parses a decimal or a "p/q" fraction of two decimals ("3/4", "-1.5/2").
std::optional<Rational> parse_rational(std::string_view s);

/// Terminating values render as plain decimals ("0.75", "-3"), everything
/// else as a reduced "p/q".
std::string render_rational(const Rational& r);

}  // namespace rewardkit

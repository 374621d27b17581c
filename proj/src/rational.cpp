#include "rewardkit/rational.hpp"

#include <algorithm>
#include <cctype>

namespace rewardkit {
namespace {

using boost::multiprecision::cpp_int;

constexpr long kMaxExponent = 4000;

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

cpp_int pow10(long e) {
  cpp_int r = 1;
  for (long i = 0; i < e; ++i) r *= 10;
  return r;
}

}  // namespace

double to_double(const Rational& r) { return r.convert_to<double>(); }

std::optional<Rational> parse_decimal(std::string_view s) {
  bool negative = false;
  if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  long exponent = 0;
  if (const auto e = s.find_first_of("eE"); e != std::string_view::npos) {
    auto exp_part = s.substr(e + 1);
    s = s.substr(0, e);
    bool exp_negative = false;
    if (!exp_part.empty() && (exp_part.front() == '+' || exp_part.front() == '-')) {
      exp_negative = exp_part.front() == '-';
      exp_part.remove_prefix(1);
    }
    if (!all_digits(exp_part) || exp_part.size() > 4) return std::nullopt;
    exponent = std::stol(std::string(exp_part));
    if (exponent > kMaxExponent) return std::nullopt;
    if (exp_negative) exponent = -exponent;
  }
  std::string_view int_part = s;
  std::string_view frac_part;
  if (const auto dot = s.find('.'); dot != std::string_view::npos) {
    int_part = s.substr(0, dot);
    frac_part = s.substr(dot + 1);
    if (int_part.empty() && frac_part.empty()) return std::nullopt;
    if (!int_part.empty() && !all_digits(int_part)) return std::nullopt;
    if (!frac_part.empty() && !all_digits(frac_part)) return std::nullopt;
  } else if (!all_digits(int_part)) {
    return std::nullopt;
  }
  std::string digits(int_part);
  digits.append(frac_part);
  if (digits.empty()) return std::nullopt;
  // cpp_int reads a leading 0 as an octal prefix
  const auto first = digits.find_first_not_of('0');
  digits.erase(0, first == std::string::npos ? digits.size() - 1 : first);
  cpp_int numerator(digits);
  long scale = static_cast<long>(frac_part.size()) - exponent;
  Rational value;
  if (scale >= 0) {
    value = Rational(numerator, pow10(scale));
  } else {
    value = Rational(numerator * pow10(-scale));
  }
  return negative ? Rational(-value) : value;
}

std::optional<Rational> parse_rational(std::string_view s) {
  const auto slash = s.find('/');
  if (slash == std::string_view::npos) return parse_decimal(s);
  if (s.find('/', slash + 1) != std::string_view::npos) return std::nullopt;
  const auto num = parse_decimal(s.substr(0, slash));
  const auto den = parse_decimal(s.substr(slash + 1));
  if (!num || !den || *den == 0) return std::nullopt;
  return Rational(*num / *den);
}

std::string render_rational(const Rational& r) {
  const cpp_int num = boost::multiprecision::numerator(r);
  const cpp_int den = boost::multiprecision::denominator(r);
  cpp_int d = den;
  long twos = 0;
  long fives = 0;
  while (d % 2 == 0) {
    d /= 2;
    ++twos;
  }
  while (d % 5 == 0) {
    d /= 5;
    ++fives;
  }
  if (d != 1) return num.str() + "/" + den.str();
  const long places = std::max(twos, fives);
  const cpp_int scaled = num * (pow10(places) / den);
  const bool negative = scaled < 0;
  std::string digits = (negative ? cpp_int(-scaled) : scaled).str();
  if (places > 0) {
    if (static_cast<long>(digits.size()) <= places) {
      digits.insert(0, static_cast<std::size_t>(places - static_cast<long>(digits.size()) + 1), '0');
    }
    digits.insert(digits.size() - static_cast<std::size_t>(places), ".");
  }
  return negative ? "-" + digits : digits;
}

}  // namespace rewardkit

#include "lodlog/rational.hpp"

#include <cctype>

namespace lodlog {

Rational Rational::from_decimal_string(const std::string& s) {
  std::size_t pos = 0;
  bool neg = false;
  if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
    neg = s[pos] == '-';
    ++pos;
  }
  std::int64_t num = 0;
  std::int64_t den = 1;
  bool any_digit = false;
  bool seen_dot = false;
  for (; pos < s.size(); ++pos) {
    char c = s[pos];
    if (c == '.') {
      if (seen_dot) throw std::invalid_argument("rational: bad decimal '" + s + "'");
      seen_dot = true;
      continue;
    }
    if (!std::isdigit(static_cast<unsigned char>(c)))
      throw std::invalid_argument("rational: bad decimal '" + s + "'");
    num = num * 10 + (c - '0');
    if (seen_dot) den *= 10;
    any_digit = true;
  }
  if (!any_digit) throw std::invalid_argument("rational: bad decimal '" + s + "'");
  return Rational(neg ? -num : num, den);
}

std::string Rational::to_display() const {
  std::int64_t hundredths = num_ * 100 / den_;  // truncation toward zero
  std::int64_t whole = hundredths / 100;
  std::int64_t frac = hundredths % 100;
  if (frac < 0) frac = -frac;
  std::string out = std::to_string(whole);
  out.push_back('.');
  if (frac < 10) out.push_back('0');
  out += std::to_string(frac);
  return out;
}

std::string Rational::to_fraction_string() const {
  return std::to_string(num_) + "/" + std::to_string(den_);
}

} // namespace lodlog

#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace lodlog {

// Exact non-negative rational. Trust degrees are small fractions (k over
// the roster size) so int64 with gcd normalization is ample.
class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
    if (den_ == 0) throw std::invalid_argument("rational: zero denominator");
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    normalize();
  }
  static Rational from_int(std::int64_t v) { return Rational(v, 1); }

  // Exact decimal parse: "0.75" -> 3/4. Rejects anything else.
  static Rational from_decimal_string(const std::string& s);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  Rational operator+(const Rational& o) const {
    return Rational(num_ * o.den_ + o.num_ * den_, den_ * o.den_);
  }
  Rational operator/(std::int64_t v) const { return Rational(num_, den_ * v); }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator<(const Rational& a, const Rational& b) {
    return a.num_ * b.den_ < b.num_ * a.den_;
  }
  friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
  friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
  friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  // Truncated two-decimal rendering: 9/11 -> "0.81", 5/11 -> "0.45".
  std::string to_display() const;

  // "num/den" exact form used in stored records.
  std::string to_fraction_string() const;

 private:
  void normalize() {
    std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

} // namespace lodlog

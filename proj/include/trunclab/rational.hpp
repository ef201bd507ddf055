#pragma once

#include <compare>
#include <string>
#include <string_view>

#include "trunclab/core.hpp"

namespace trunclab {

// Reduced fraction with positive denominator. Arithmetic is overflow-checked.
class Rational {
 public:
  Rational() = default;
  Rational(i128 num) : num_(num) {}  // NOLINT(google-explicit-constructor)
  Rational(i128 num, i128 den);

  i128 num() const { return num_; }
  i128 den() const { return den_; }

  bool is_zero() const { return num_ == 0; }
  bool is_integer() const { return den_ == 1; }

  Rational operator-() const;
  Rational abs() const { return num_ < 0 ? -*this : *this; }
  Rational reciprocal() const;

  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);

  friend bool operator==(const Rational& a, const Rational& b) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

  long double to_long_double() const { return static_cast<long double>(num_) / static_cast<long double>(den_); }

  // "b" or "b/c".
  std::string to_string() const;
  static Rational parse(std::string_view text);

 private:
  i128 num_ = 0;
  i128 den_ = 1;
};

}  // namespace trunclab

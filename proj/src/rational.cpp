#include "trunclab/rational.hpp"

namespace trunclab {

Rational::Rational(i128 num, i128 den) {
  if (den == 0) fail(Errc::zero_input, "rational with zero denominator");
  if (den < 0) {
    num = checked_sub(0, num);
    den = checked_sub(0, den);
  }
  i128 g = gcd(num, den);
  num_ = num / g;
  den_ = den / g;
}

Rational Rational::operator-() const { return Rational(checked_sub(0, num_), den_); }

Rational Rational::reciprocal() const {
  if (num_ == 0) fail(Errc::zero_input, "reciprocal of zero");
  return Rational(den_, num_);
}

Rational operator+(const Rational& a, const Rational& b) {
  i128 g = gcd(a.den_, b.den_);
  i128 num = checked_add(checked_mul(a.num_, b.den_ / g), checked_mul(b.num_, a.den_ / g));
  return Rational(num, checked_mul(a.den_ / g, b.den_));
}

Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }

Rational operator*(const Rational& a, const Rational& b) {
  i128 g1 = gcd(a.num_, b.den_);
  i128 g2 = gcd(b.num_, a.den_);
  if (g1 == 0) g1 = 1;
  if (g2 == 0) g2 = 1;
  return Rational(checked_mul(a.num_ / g1, b.num_ / g2), checked_mul(a.den_ / g2, b.den_ / g1));
}

Rational operator/(const Rational& a, const Rational& b) { return a * b.reciprocal(); }

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  i128 lhs;
  i128 rhs;
  if (!__builtin_mul_overflow(a.num_, b.den_, &lhs) && !__builtin_mul_overflow(b.num_, a.den_, &rhs)) {
    return lhs <=> rhs;
  }
  // Overflow fallback: compare integer parts, then recurse on the fractional parts.
  auto floor_div = [](i128 n, i128 d) {
    i128 q = n / d;
    if ((n % d != 0) && (n < 0)) --q;
    return q;
  };
  i128 qa = floor_div(a.num_, a.den_);
  i128 qb = floor_div(b.num_, b.den_);
  if (qa != qb) return qa <=> qb;
  Rational fa(a.num_ - qa * a.den_, a.den_);
  Rational fb(b.num_ - qb * b.den_, b.den_);
  if (fa.is_zero() || fb.is_zero()) return fa.num_ <=> fb.num_;
  // Compare 1/fa and 1/fb in reverse.
  return fb.reciprocal() <=> fa.reciprocal();
}

std::string Rational::to_string() const {
  if (den_ == 1) return trunclab::to_string(num_);
  return trunclab::to_string(num_) + "/" + trunclab::to_string(den_);
}

Rational Rational::parse(std::string_view text) {
  auto slash = text.find('/');
  if (slash == std::string_view::npos) return Rational(parse_i128(text));
  return Rational(parse_i128(text.substr(0, slash)), parse_i128(text.substr(slash + 1)));
}

}  // namespace trunclab

#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>

#include "trunclab/core.hpp"
#include "trunclab/exactnum.hpp"
#include "trunclab/placeval.hpp"
#include "trunclab/rational.hpp"

namespace trunclab::diophfun {

using placeval::AlgebraicTarget;
using placeval::Place;

// Point of P^n: coprime integer coordinates, first nonzero coordinate positive.
class ProjPoint {
 public:
  explicit ProjPoint(std::vector<i128> coords);
  // x = b/c  ->  [b : c]
  static ProjPoint from_rational(const Rational& x);
  static ProjPoint infinity_p1() { return ProjPoint({1, 0}); }
  // "[1:3:2]" or "1:3:2"
  static ProjPoint parse(std::string_view text);

  std::span<const i128> coords() const { return coords_; }
  i128 operator[](std::size_t i) const { return coords_[i]; }
  unsigned dim() const { return unsigned(coords_.size() - 1); }
  u128 max_abs() const;
  std::string to_string() const;

  friend bool operator==(const ProjPoint&, const ProjPoint&) = default;

 private:
  std::vector<i128> coords_;
};

// A single target point of P^1 for weil_point.
class P1Target {
 public:
  enum class Kind { rational, infinity, algebraic };

  static P1Target zero() { return rational(Rational(0)); }
  static P1Target one() { return rational(Rational(1)); }
  static P1Target infinity();
  static P1Target rational(const Rational& r);
  static P1Target algebraic(const AlgebraicTarget& t);

  Kind kind() const { return kind_; }
  const Rational& value() const { return value_; }
  const AlgebraicTarget& target() const { return *target_; }

 private:
  Kind kind_ = Kind::rational;
  Rational value_;
  std::optional<AlgebraicTarget> target_;
};

// Local Weil value; at a prime place it is exactly coef * log p.
struct WeilValue {
  Place place = Place::infinity();
  long double value = 0;
  long long coef = 0;
};

class DivisorSpec {
 public:
  enum class Kind { p1, pn };

  // Point (or Galois orbit) of P^1, stored as the primitive binary form
  // F(x0, x1) = sum f_i x0^i x1^(d-i) vanishing on it.
  struct P1Entry {
    std::vector<i128> form;
    unsigned multiplicity = 1;
    std::string label;
  };
  struct Hyperplane {
    std::vector<i128> coeffs;
    unsigned multiplicity = 1;
  };

  static DivisorSpec p1(std::vector<std::pair<P1Target, unsigned>> entries);
  static DivisorSpec hyperplanes(unsigned n, std::vector<Hyperplane> entries);
  // p1:[0]+[1]+[inf]+2*[3/4]+[poly:[-2,0,1];embed:arch:1]   or   pn:hyp:[1,0,0]+hyp:[0,1,0]
  static DivisorSpec parse(std::string_view text);

  Kind kind() const { return kind_; }
  unsigned dim() const { return dim_; }
  std::span<const P1Entry> points() const { return points_; }
  std::span<const Hyperplane> planes() const { return planes_; }
  unsigned degree() const;
  std::string to_string() const;

 private:
  void check_distinct() const;

  Kind kind_ = Kind::p1;
  unsigned dim_ = 1;
  std::vector<P1Entry> points_;
  std::vector<Hyperplane> planes_;
};

exactnum::FormalLogSum height_rational(const Rational& x);
exactnum::FormalLogSum height_projective(const ProjPoint& x);
// h(O(D), x) = deg(D) h(x).
exactnum::FormalLogSum height_divisor(const DivisorSpec& d, const ProjPoint& x);

// Binary form F evaluated at (b, c).
mpz_class eval_form(std::span<const i128> form, const ProjPoint& x);
mpz_class eval_linear(std::span<const i128> coeffs, const ProjPoint& x);

WeilValue weil_point(const P1Target& target, const Rational& x, const Place& v);
WeilValue weil_point(const P1Target& target, const ProjPoint& x, const Place& v);
WeilValue weil_form(std::span<const i128> form, const ProjPoint& x, const Place& v);
WeilValue weil_hyperplane(std::span<const i128> coeffs, const ProjPoint& x, const Place& v);
// Sum over the components of D with multiplicities.
WeilValue weil(const DivisorSpec& d, const ProjPoint& x, const Place& v);

long double proximity(const ProjPoint& p, const ProjPoint& x, const Place& v);
// P^1 proximity to an algebraic point [alpha : 1].
long double proximity(const AlgebraicTarget& alpha, const ProjPoint& x, const Place& v);

// Primes at which some component of D has a nonzero Weil value at x.
std::vector<u128> support_primes(const DivisorSpec& d, const ProjPoint& x);

exactnum::FormalLogSum truncated_counting(const DivisorSpec& d, const ProjPoint& x);
exactnum::FormalLogSum truncated_counting(const DivisorSpec& d, const Rational& x);

// h(O(D), x) - sum over all places of lambda_v(D, x).
long double height_weil_consistency(const DivisorSpec& d, const ProjPoint& x);

// C with proximity(P, x, v) <= weil(D, x, v) + C for every x, when P lies on
// a component of D.
long double proximity_slack(const DivisorSpec& d, const ProjPoint& p, const Place& v);

// C_A with sum_j lambda_v(alpha_j, x) <= max_j lambda_v(alpha_j, x) + C_A
// over the conjugates of alpha.
long double orbit_constant(const AlgebraicTarget& alpha, const Place& v);

}  // namespace trunclab::diophfun

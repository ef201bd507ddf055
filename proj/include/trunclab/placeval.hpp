#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>

#include "trunclab/core.hpp"
#include "trunclab/rational.hpp"

namespace trunclab::placeval {

class Place {
 public:
  static Place infinity() { return Place(0); }
  // Throws BadParams unless p is prime.
  static Place prime(u64 p);
  // "inf" or a prime.
  static Place parse(std::string_view text);

  bool is_archimedean() const { return p_ == 0; }
  u64 p() const { return p_; }
  std::string to_string() const;

  friend bool operator==(const Place&, const Place&) = default;

 private:
  explicit Place(u64 p) : p_(p) {}
  u64 p_;
};

int vp(i128 n, u64 p);
int vp(const Rational& x, u64 p);
int vp(const mpz_class& n, u64 p);

// log |x|_v, with |p|_p = 1/p.
long double log_abs(const Rational& x, const Place& v);

struct PadicApprox {
  mpz_class residue;
  mpz_class modulus;
  u64 p = 0;
  unsigned k = 0;  // modulus == p^k
};

inline constexpr unsigned kInitialPadicPrecision = 8;
inline constexpr unsigned kMaxPrecision = 4096;  // p-adic digits, or mantissa bits
inline constexpr long double kArchRelTolerance = 1e-12L;
inline constexpr std::size_t kMaxDegree = 16;

struct RootDisk {
  std::complex<long double> center;
  long double radius;
};

// Nonzero algebraic number: minimal polynomial (content 1, positive leading
// coefficient, nonzero constant term) plus an embedding.
class AlgebraicTarget {
 public:
  enum class Embedding { archimedean, padic };

  static AlgebraicTarget rational(const Rational& value);
  static AlgebraicTarget archimedean(std::vector<i64> poly, unsigned root_index);
  static AlgebraicTarget padic(std::vector<i64> poly, u64 p, i64 seed);
  // poly:[c0,c1,...];embed:arch:<k>  or  poly:[...];embed:padic:<p>:<seed>
  static AlgebraicTarget parse(std::string_view text);

  std::span<const i64> minpoly() const { return poly_; }
  unsigned degree() const { return unsigned(poly_.size() - 1); }
  bool is_rational() const { return degree() == 1; }
  Rational as_rational() const;

  Embedding embedding() const { return embedding_; }
  unsigned root_index() const { return root_index_; }
  u64 prime() const { return prime_; }
  i64 seed() const { return seed_; }

  // Usable at v: rational targets everywhere, others only at their own place.
  bool valid_at(const Place& v) const;

  // Complex roots of the minimal polynomial in embedding order, with
  // certified enclosing disks.
  std::span<const RootDisk> roots() const { return roots_; }
  const RootDisk& root() const { return roots_[root_index_]; }

  // Absolute logarithmic height (log Mahler measure / degree).
  long double height() const { return height_; }

  // minpoly homogenized and evaluated at (b, c):  sum a_i b^i c^(d-i).
  mpz_class eval_homogeneous(const mpz_class& b, const mpz_class& c) const;

  std::string to_string() const;

 private:
  AlgebraicTarget() = default;
  void finish();

  std::vector<i64> poly_;
  Embedding embedding_ = Embedding::archimedean;
  unsigned root_index_ = 0;
  u64 prime_ = 0;
  i64 seed_ = 0;
  std::vector<RootDisk> roots_;
  long double height_ = 0;
};

// Certified complex roots of an integer polynomial, ordered by real part and
// then imaginary part. Throws PrecisionOverflow if roots cannot be separated.
std::vector<RootDisk> isolate_roots(std::span<const i64> poly);

bool is_irreducible(std::span<const i64> poly);

PadicApprox hensel_lift(const AlgebraicTarget& target, unsigned k);

// v_p(alpha - x) if it is below the lifting precision k, else nullopt.
std::optional<int> val_diff_at(const AlgebraicTarget& target, const Rational& x, unsigned k);
int val_diff(const AlgebraicTarget& target, const Rational& x);

struct DistEstimate {
  long double value;
  long double rel_error;

  long double lower() const { return value * (1 - rel_error); }
  long double upper() const { return value * (1 + rel_error); }
};

// |alpha - x| at the given working precision in bits (64 uses the cached roots).
DistEstimate arch_dist_at(const AlgebraicTarget& target, const Rational& x, unsigned bits);
DistEstimate arch_dist(const AlgebraicTarget& target, const Rational& x);

// -log |alpha - x|_v, unclamped.
long double minus_log_dist(const AlgebraicTarget& target, const Rational& x, const Place& v);

}  // namespace trunclab::placeval

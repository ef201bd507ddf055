#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "trunclab/core.hpp"
#include "trunclab/rational.hpp"

namespace trunclab::exactnum {

struct PrimePower {
  u128 prime = 0;
  unsigned exponent = 0;

  friend bool operator==(const PrimePower&, const PrimePower&) = default;
};

// Factorization of |n| held inline; no integer below 2^128 has more than 26
// distinct prime factors.
class PrimeFactorization {
 public:
  static constexpr std::size_t kCapacity = 32;

  std::span<const PrimePower> entries() const { return {entries_.data(), size_}; }
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  // Inserts p^e keeping primes sorted; merges equal primes.
  void add(u128 prime, unsigned exponent);

  u128 value() const;
  u128 radical() const;
  u128 largest_prime() const { return size_ == 0 ? 1 : entries_[size_ - 1].prime; }

  friend bool operator==(const PrimeFactorization& a, const PrimeFactorization& b);

 private:
  std::array<PrimePower, kCapacity> entries_{};
  std::size_t size_ = 0;
};

struct FactorizeOptions {
  // Inputs wider than this many bits are rejected.
  unsigned max_bits = 128;
  // Total Pollard-Brent iterations allowed per composite cofactor.
  u64 rho_budget = u64(1) << 26;
};

// Bound of the trial-division / smallest-prime-factor table.
inline constexpr u64 kSmallPrimeLimit = 1'000'000;

std::span<const std::uint32_t> small_primes();

PrimeFactorization factorize(i128 n, const FactorizeOptions& options = {});
PrimeFactorization factorize_magnitude(u128 n, const FactorizeOptions& options = {});

bool is_prime(u128 n);

u128 radical(i128 n);
unsigned omega(i128 n);
u128 largest_prime_factor(i128 n);

// rad(n1 * n2 * ...) without forming the product.
u128 radical_of_product(std::span<const i128> factors);

// log* t = log max{e, t}.
long double logstar(long double t);
long double logstar_iter(long double t, unsigned r);
// log+ t = log max{1, t}.
long double logplus(long double t);

long double log_u128(u128 n);

// Exact nonnegative combination  sum_p c_p log p + sum_n log n.
class FormalLogSum {
 public:
  struct PrimeTerm {
    u128 prime;
    Rational coef;
    friend bool operator==(const PrimeTerm&, const PrimeTerm&) = default;
  };

  FormalLogSum() = default;

  static FormalLogSum log_of(u128 n);
  static FormalLogSum prime_term(u128 p, Rational coef = Rational(1));
  // sum of log p over the given primes (each with coefficient 1).
  static FormalLogSum of_primes(std::span<const u128> primes);

  void add_prime(u128 p, const Rational& coef);
  void add_log(u128 n);

  FormalLogSum& operator+=(const FormalLogSum& other);
  friend FormalLogSum operator+(FormalLogSum a, const FormalLogSum& b) { return a += b; }
  FormalLogSum scaled(unsigned k) const;

  std::span<const PrimeTerm> prime_terms() const { return primes_; }
  std::span<const u128> integer_terms() const { return integers_; }
  bool empty() const { return primes_.empty() && integers_.empty(); }

  // Folds the integer terms into prime terms by factoring them.
  FormalLogSum normalized() const;

  std::vector<u128> support() const;

  long double evaluate() const;

  // Primes of this sum (coefficient-wise) exceeding `other`, as a sum.
  FormalLogSum excess_over(const FormalLogSum& other) const;

  std::string to_string() const;

  friend bool operator==(const FormalLogSum&, const FormalLogSum&) = default;

 private:
  std::vector<PrimeTerm> primes_;  // sorted by prime, positive coefficients
  std::vector<u128> integers_;     // sorted multiset, entries >= 2
};

enum class Order { less, equal, greater };

struct LogSumComparison {
  Order order;
  bool exact;
};

inline constexpr long double kLogSumTolerance = 1e-9L;

LogSumComparison compare(const FormalLogSum& a, const FormalLogSum& b,
                         long double tolerance = kLogSumTolerance);

}  // namespace trunclab::exactnum

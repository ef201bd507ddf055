#include "trunclab/exactnum.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

namespace trunclab::exactnum {

namespace {

struct SmallPrimeTable {
  std::vector<std::uint32_t> spf;  // smallest prime factor, index <= kSmallPrimeLimit
  std::vector<std::uint32_t> primes;

  SmallPrimeTable() : spf(kSmallPrimeLimit + 1, 0) {
    for (u64 i = 2; i <= kSmallPrimeLimit; ++i) {
      if (spf[i] == 0) {
        primes.push_back(std::uint32_t(i));
        for (u64 j = i; j <= kSmallPrimeLimit; j += i) {
          if (spf[j] == 0) spf[j] = std::uint32_t(i);
        }
      }
    }
  }
};

const SmallPrimeTable& table() {
  static const SmallPrimeTable t;
  return t;
}

unsigned bit_width(u128 n) {
  u64 hi = u64(n >> 64);
  return hi != 0 ? 64 + unsigned(std::bit_width(hi)) : unsigned(std::bit_width(u64(n)));
}

// Arithmetic modulo n < 2^64.
struct Mod64 {
  u64 n;
  explicit Mod64(u64 modulus) : n(modulus) {}
  u64 from(u128 v) const { return u64(v % n); }
  u64 to_int(u64 v) const { return v; }
  u64 mul(u64 a, u64 b) const { return u64(u128(a) * b % n); }
  u64 add(u64 a, u64 b) const {
    u128 s = u128(a) + b;
    return s >= n ? u64(s - n) : u64(s);
  }
  u64 one() const { return 1 % n; }
  u128 modulus() const { return n; }
};

struct U256 {
  u128 hi;
  u128 lo;
};

U256 mul_wide(u128 a, u128 b) {
  constexpr u128 mask = ~u64(0);
  u128 a0 = a & mask, a1 = a >> 64, b0 = b & mask, b1 = b >> 64;
  u128 p00 = a0 * b0, p01 = a0 * b1, p10 = a1 * b0, p11 = a1 * b1;
  u128 mid = (p00 >> 64) + (p01 & mask) + (p10 & mask);
  return {p11 + (p01 >> 64) + (p10 >> 64) + (mid >> 64), (p00 & mask) | (mid << 64)};
}

// Montgomery arithmetic modulo an odd n >= 2^64.
struct Mont128 {
  u128 n;
  u128 neg_inv;  // -n^{-1} mod 2^128
  u128 r_mod;    // 2^128 mod n
  u128 r2_mod;   // 2^256 mod n

  explicit Mont128(u128 modulus) : n(modulus) {
    u128 inv = n;  // correct to 3 bits for odd n
    for (int i = 0; i < 7; ++i) inv *= 2 - n * inv;
    neg_inv = u128(0) - inv;
    r_mod = (u128(0) - n) % n;
    u128 x = r_mod;
    for (int i = 0; i < 128; ++i) x = add(x, x);
    r2_mod = x;
  }

  u128 redc(U256 t) const {
    u128 m = t.lo * neg_inv;
    U256 mn = mul_wide(m, n);
    u128 lo = t.lo + mn.lo;
    u128 carry = lo < t.lo ? 1 : 0;
    u128 s1 = t.hi + mn.hi;
    bool c1 = s1 < t.hi;
    u128 s2 = s1 + carry;
    bool c2 = s2 < s1;
    if (c1 || c2 || s2 >= n) s2 -= n;
    return s2;
  }

  u128 mul(u128 a, u128 b) const { return redc(mul_wide(a, b)); }
  u128 add(u128 a, u128 b) const {
    u128 s = a + b;
    if (s < a || s >= n) s -= n;
    return s;
  }
  u128 from(u128 v) const { return mul(v % n, r2_mod); }
  u128 to_int(u128 v) const { return redc({0, v}); }
  u128 one() const { return r_mod; }
  u128 modulus() const { return n; }
};

template <class Arith>
auto pow_mod(const Arith& ar, decltype(ar.one()) base, u128 exp) {
  auto result = ar.one();
  while (exp != 0) {
    if (exp & 1) result = ar.mul(result, base);
    base = ar.mul(base, base);
    exp >>= 1;
  }
  return result;
}

template <class Arith>
bool miller_rabin(const Arith& ar, std::span<const std::uint32_t> bases) {
  u128 n = ar.modulus();
  u128 d = n - 1;
  unsigned s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  auto one = ar.one();
  auto minus_one = ar.from(n - 1);
  for (std::uint32_t a : bases) {
    if (u128(a) % n == 0) continue;
    auto x = pow_mod(ar, ar.from(a), d);
    if (x == one || x == minus_one) continue;
    bool composite = true;
    for (unsigned r = 1; r < s; ++r) {
      x = ar.mul(x, x);
      if (x == minus_one) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

// Deterministic below 3.3e24; used as a strong probable-prime test above.
constexpr std::array<std::uint32_t, 12> kBases64 = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
constexpr std::array<std::uint32_t, 24> kBases128 = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37,
                                                     41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89};

template <class Arith>
u128 brent_rho(const Arith& ar, u64& budget) {
  u128 n = ar.modulus();
  using Elem = decltype(ar.one());
  for (u64 c = 1;; ++c) {
    Elem cc = ar.from(c);
    auto f = [&](Elem v) { return ar.add(ar.mul(v, v), cc); };
    Elem y = ar.from(2 + c);
    Elem x = y;
    Elem ys = y;
    Elem q = ar.one();
    u128 g = 1;
    constexpr u64 m = 128;
    auto charge = [&](u64 steps) {
      if (budget < steps) fail(Errc::factorization_too_large, "Pollard-Brent budget exhausted");
      budget -= steps;
    };
    for (u64 r = 1; g == 1; r <<= 1) {
      x = y;
      charge(r);
      for (u64 i = 0; i < r; ++i) y = f(y);
      for (u64 k = 0; k < r && g == 1; k += m) {
        ys = y;
        u64 steps = std::min(m, r - k);
        charge(steps);
        for (u64 i = 0; i < steps; ++i) {
          y = f(y);
          Elem diff = x > y ? Elem(x - y) : Elem(y - x);
          q = ar.mul(q, diff);
        }
        g = gcd(u128(q), n);
      }
    }
    if (g == n) {
      do {
        ys = f(ys);
        Elem diff = x > ys ? Elem(x - ys) : Elem(ys - x);
        g = gcd(u128(diff), n);
        charge(1);
      } while (g == 1);
    }
    if (g != n) return g;
  }
}

u128 find_factor(u128 n, u64& budget) {
  if (n <= ~u64(0)) return brent_rho(Mod64(u64(n)), budget);
  return brent_rho(Mont128(n), budget);
}

// Exact k-th root of n if n is a perfect k-th power, else 0.
u128 exact_root(u128 n, unsigned k) {
  auto r = static_cast<u128>(std::llround(std::pow(static_cast<long double>(n), 1.0L / k)));
  for (u128 c = r > 2 ? r - 2 : 1; c <= r + 2; ++c) {
    u128 v = 1;
    bool over = false;
    for (unsigned i = 0; i < k && !over; ++i) over = __builtin_mul_overflow(v, c, &v);
    if (!over && v == n) return c;
  }
  return 0;
}

void factor_composite(u128 n, PrimeFactorization& out, u64& budget);

// Cofactors here have no prime below 10^6, so exponents above 6 cannot occur.
bool split_power(u128 n, PrimeFactorization& out, u64& budget) {
  for (unsigned k : {2u, 3u, 5u}) {
    if (u128 r = exact_root(n, k); r != 0) {
      PrimeFactorization inner;
      factor_composite(r, inner, budget);
      for (const auto& e : inner.entries()) out.add(e.prime, e.exponent * k);
      return true;
    }
  }
  return false;
}

void factor_composite(u128 n, PrimeFactorization& out, u64& budget) {
  if (n == 1) return;
  if (n <= kSmallPrimeLimit) {
    const auto& spf = table().spf;
    while (n > 1) {
      std::uint32_t p = spf[std::size_t(n)];
      unsigned e = 0;
      while (n % p == 0) {
        n /= p;
        ++e;
      }
      out.add(p, e);
    }
    return;
  }
  if (is_prime(n)) {
    out.add(n, 1);
    return;
  }
  if (split_power(n, out, budget)) return;
  u128 d = find_factor(n, budget);
  factor_composite(d, out, budget);
  factor_composite(n / d, out, budget);
}

}  // namespace

void PrimeFactorization::add(u128 prime, unsigned exponent) {
  if (exponent == 0) return;
  std::size_t pos = 0;
  while (pos < size_ && entries_[pos].prime < prime) ++pos;
  if (pos < size_ && entries_[pos].prime == prime) {
    entries_[pos].exponent += exponent;
    return;
  }
  if (size_ == kCapacity) fail(Errc::overflow, "too many distinct primes");
  for (std::size_t i = size_; i > pos; --i) entries_[i] = entries_[i - 1];
  entries_[pos] = {prime, exponent};
  ++size_;
}

u128 PrimeFactorization::value() const {
  u128 v = 1;
  for (const auto& e : entries()) {
    for (unsigned i = 0; i < e.exponent; ++i) {
      u128 next;
      if (__builtin_mul_overflow(v, e.prime, &next)) fail(Errc::overflow, "factorization value exceeds 128 bits");
      v = next;
    }
  }
  return v;
}

u128 PrimeFactorization::radical() const {
  u128 v = 1;
  for (const auto& e : entries()) v *= e.prime;
  return v;
}

bool operator==(const PrimeFactorization& a, const PrimeFactorization& b) {
  return std::ranges::equal(a.entries(), b.entries());
}

std::span<const std::uint32_t> small_primes() { return table().primes; }

bool is_prime(u128 n) {
  if (n < 2) return false;
  if (n <= kSmallPrimeLimit) return table().spf[std::size_t(n)] == n;
  for (std::uint32_t p : kBases128) {
    if (n % p == 0) return false;
  }
  if (n <= ~u64(0)) return miller_rabin(Mod64(u64(n)), kBases64);
  return miller_rabin(Mont128(n), kBases128);
}

PrimeFactorization factorize_magnitude(u128 n, const FactorizeOptions& options) {
  if (n == 0) fail(Errc::zero_input, "factorize(0)");
  if (bit_width(n) > options.max_bits) {
    fail(Errc::factorization_too_large, to_string(n) + " exceeds " + std::to_string(options.max_bits) + " bits");
  }
  PrimeFactorization out;
  u64 budget = options.rho_budget;
  // Trial division by the tabulated primes; stops once the cofactor is
  // tabulated, or proven prime by p^2 > n or by Miller-Rabin.
  const auto& t = table();
  for (std::size_t idx = 0; n > kSmallPrimeLimit && idx < t.primes.size(); ++idx) {
    u64 p = t.primes[idx];
    if (u128(p) * p > n) {
      out.add(n, 1);
      n = 1;
      break;
    }
    if (n % p == 0) {
      unsigned e = 0;
      do {
        n /= p;
        ++e;
      } while (n % p == 0);
      out.add(p, e);
    }
    if (idx == 168 && n > kSmallPrimeLimit && is_prime(n)) {
      out.add(n, 1);
      n = 1;
    }
  }
  factor_composite(n, out, budget);
  return out;
}

PrimeFactorization factorize(i128 n, const FactorizeOptions& options) { return factorize_magnitude(uabs(n), options); }

u128 radical(i128 n) { return factorize(n).radical(); }

unsigned omega(i128 n) { return unsigned(factorize(n).size()); }

u128 largest_prime_factor(i128 n) {
  if (n < 1) fail(Errc::zero_input, "largest_prime_factor expects n >= 1");
  return factorize(n).largest_prime();
}

u128 radical_of_product(std::span<const i128> factors) {
  PrimeFactorization merged;
  for (i128 f : factors) {
    auto fac = factorize(f);
    for (const auto& e : fac.entries()) merged.add(e.prime, 1);
  }
  u128 r = 1;
  for (const auto& e : merged.entries()) {
    if (__builtin_mul_overflow(r, e.prime, &r)) fail(Errc::overflow, "radical exceeds 128 bits");
  }
  return r;
}

long double logstar(long double t) {
  constexpr long double e = std::numbers::e_v<long double>;
  return t > e ? std::log(t) : 1.0L;
}

long double logstar_iter(long double t, unsigned r) {
  if (r == 0) fail(Errc::bad_params, "logstar_iter requires r >= 1");
  long double v = t;
  for (unsigned i = 0; i < r; ++i) v = logstar(v);
  return v;
}

long double logplus(long double t) { return t > 1.0L ? std::log(t) : 0.0L; }

long double log_u128(u128 n) { return std::log(static_cast<long double>(n)); }

// ---------------------------------------------------------------- FormalLogSum

FormalLogSum FormalLogSum::log_of(u128 n) {
  FormalLogSum s;
  s.add_log(n);
  return s;
}

FormalLogSum FormalLogSum::prime_term(u128 p, Rational coef) {
  FormalLogSum s;
  s.add_prime(p, coef);
  return s;
}

FormalLogSum FormalLogSum::of_primes(std::span<const u128> primes) {
  FormalLogSum s;
  for (u128 p : primes) s.add_prime(p, Rational(1));
  return s;
}

void FormalLogSum::add_prime(u128 p, const Rational& coef) {
  if (coef < Rational(0)) fail(Errc::bad_params, "negative coefficient in FormalLogSum");
  if (p < 2) fail(Errc::bad_params, "prime term below 2");
  if (coef.is_zero()) return;
  auto it = std::lower_bound(primes_.begin(), primes_.end(), p,
                             [](const PrimeTerm& t, u128 q) { return t.prime < q; });
  if (it != primes_.end() && it->prime == p) {
    it->coef = it->coef + coef;
  } else {
    primes_.insert(it, PrimeTerm{p, coef});
  }
}

void FormalLogSum::add_log(u128 n) {
  if (n == 0) fail(Errc::zero_input, "log of zero in FormalLogSum");
  if (n == 1) return;
  integers_.insert(std::upper_bound(integers_.begin(), integers_.end(), n), n);
}

FormalLogSum& FormalLogSum::operator+=(const FormalLogSum& other) {
  for (const auto& t : other.primes_) add_prime(t.prime, t.coef);
  for (u128 n : other.integers_) add_log(n);
  return *this;
}

FormalLogSum FormalLogSum::scaled(unsigned k) const {
  FormalLogSum s;
  for (const auto& t : primes_) s.add_prime(t.prime, t.coef * Rational(i128(k)));
  for (unsigned i = 0; i < k; ++i) {
    for (u128 n : integers_) s.add_log(n);
  }
  return s;
}

FormalLogSum FormalLogSum::normalized() const {
  FormalLogSum s;
  s.primes_ = primes_;
  for (u128 n : integers_) {
    auto fac = factorize_magnitude(n);
    for (const auto& e : fac.entries()) s.add_prime(e.prime, Rational(i128(e.exponent)));
  }
  return s;
}

std::vector<u128> FormalLogSum::support() const {
  std::vector<u128> out;
  for (const auto& t : normalized().primes_) out.push_back(t.prime);
  return out;
}

long double FormalLogSum::evaluate() const {
  long double acc = 0;
  for (const auto& t : primes_) acc += t.coef.to_long_double() * log_u128(t.prime);
  for (u128 n : integers_) acc += log_u128(n);
  return acc;
}

FormalLogSum FormalLogSum::excess_over(const FormalLogSum& other) const {
  FormalLogSum a = normalized();
  FormalLogSum b = other.normalized();
  FormalLogSum out;
  for (const auto& t : a.primes_) {
    auto it = std::lower_bound(b.primes_.begin(), b.primes_.end(), t.prime,
                               [](const PrimeTerm& x, u128 q) { return x.prime < q; });
    Rational have = (it != b.primes_.end() && it->prime == t.prime) ? it->coef : Rational(0);
    if (t.coef > have) out.add_prime(t.prime, t.coef - have);
  }
  return out;
}

std::string FormalLogSum::to_string() const {
  std::string out;
  auto sep = [&] {
    if (!out.empty()) out += " + ";
  };
  for (const auto& t : primes_) {
    sep();
    if (t.coef != Rational(1)) out += t.coef.to_string() + "*";
    out += "log " + trunclab::to_string(t.prime);
  }
  for (u128 n : integers_) {
    sep();
    out += "log " + trunclab::to_string(n);
  }
  return out.empty() ? "0" : out;
}

LogSumComparison compare(const FormalLogSum& a, const FormalLogSum& b, long double tolerance) {
  if (a == b) return {Order::equal, true};
  FormalLogSum na = a;
  FormalLogSum nb = b;
  try {
    na = a.normalized();
    nb = b.normalized();
  } catch (const Error&) {
    // Unfactorable integer terms: fall through to numeric comparison.
  }
  if (na == nb) return {Order::equal, true};
  if (na.integer_terms().empty() && nb.integer_terms().empty()) {
    if (b.excess_over(a).empty()) return {Order::greater, true};
    if (a.excess_over(b).empty()) return {Order::less, true};
  }
  long double diff = na.evaluate() - nb.evaluate();
  if (std::fabs(diff) <= tolerance) return {Order::equal, false};
  return {diff < 0 ? Order::less : Order::greater, false};
}

}  // namespace trunclab::exactnum

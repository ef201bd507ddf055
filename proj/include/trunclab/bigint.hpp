#pragma once

#include <cmath>
#include <optional>

#include <gmpxx.h>

#include "trunclab/core.hpp"

namespace trunclab {

inline mpz_class to_mpz(u128 v) {
  mpz_class hi(static_cast<unsigned long>(u64(v >> 64)));
  return (hi << 64) + mpz_class(static_cast<unsigned long>(u64(v)));
}

inline mpz_class to_mpz(i128 v) {
  mpz_class m = to_mpz(uabs(v));
  return v < 0 ? mpz_class(-m) : m;
}

// |n| as u128 when it fits.
inline std::optional<u128> abs_to_u128(const mpz_class& n) {
  if (mpz_sizeinbase(n.get_mpz_t(), 2) > 128) return std::nullopt;
  mpz_class a = abs(n);
  mpz_class hi = a >> 64;
  mpz_class lo = a - (hi << 64);
  return (u128(hi.get_ui()) << 64) | u128(lo.get_ui());
}

inline std::optional<i128> to_i128(const mpz_class& n) {
  auto m = abs_to_u128(n);
  if (!m || *m > u128(~u128(0) >> 1)) return std::nullopt;
  return n < 0 ? -i128(*m) : i128(*m);
}

// log |n| for n != 0.
inline long double log_abs(const mpz_class& n) {
  long exp = 0;
  double mant = mpz_get_d_2exp(&exp, n.get_mpz_t());
  return std::log(std::fabs(static_cast<long double>(mant))) + exp * std::log(2.0L);
}

}  // namespace trunclab

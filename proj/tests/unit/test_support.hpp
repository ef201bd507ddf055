#pragma once

#include <map>
#include <random>

#include "doctest.h"
#include "trunclab/core.hpp"

// Asserts that `expr` throws trunclab::Error carrying `errc`.
#define CHECK_ERRC(expr, errc)                                   \
  do {                                                           \
    bool caught_ = false;                                        \
    try {                                                        \
      (void)(expr);                                              \
    } catch (const trunclab::Error& e_) {                        \
      caught_ = true;                                            \
      CHECK_MESSAGE(e_.code() == (errc), e_.what());             \
    }                                                            \
    CHECK_MESSAGE(caught_, "expected error " #errc " from " #expr); \
  } while (0)

namespace testsupport {

// Plain trial division; the independent oracle for factorization results.
inline std::map<unsigned long long, unsigned> trial_division(unsigned long long n) {
  std::map<unsigned long long, unsigned> out;
  for (unsigned long long p = 2; p * p <= n; ++p) {
    while (n % p == 0) {
      ++out[p];
      n /= p;
    }
  }
  if (n > 1) ++out[n];
  return out;
}

inline std::mt19937_64& rng() {
  static std::mt19937_64 gen(0x5eed1234ULL);
  return gen;
}

inline long long uniform(long long lo, long long hi) {
  return std::uniform_int_distribution<long long>(lo, hi)(rng());
}

}  // namespace testsupport

#include "trunclab/core.hpp"

#include <algorithm>
#include <bit>

namespace trunclab {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::zero_input: return "ZeroInput";
    case Errc::factorization_too_large: return "FactorizationTooLarge";
    case Errc::no_simple_root: return "NoSimpleRoot";
    case Errc::precision_overflow: return "PrecisionOverflow";
    case Errc::equals_target: return "EqualsTarget";
    case Errc::on_divisor: return "OnDivisor";
    case Errc::equals_point: return "EqualsPoint";
    case Errc::bad_params: return "BadParams";
    case Errc::bad_target: return "BadTarget";
    case Errc::place_mismatch: return "PlaceMismatch";
    case Errc::empty_sample: return "EmptySample";
    case Errc::product_is_one: return "ProductIsOne";
    case Errc::no_crossover_in_range: return "NoCrossoverInRange";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::invalid_relation: return "InvalidRelation";
    case Errc::one_sided_relation: return "OneSidedRelation";
    case Errc::indeterminacy_locus: return "IndeterminacyLocus";
    case Errc::on_z: return "OnZ";
    case Errc::parse_error: return "ParseError";
    case Errc::invariant_violation: return "InvariantViolation";
    case Errc::overflow: return "Overflow";
  }
  return "Unknown";
}

void fail(Errc code, const std::string& what) { throw Error(code, what); }

std::string to_string(u128 v) {
  if (v == 0) return "0";
  std::string out;
  while (v != 0) {
    out.push_back(char('0' + int(v % 10)));
    v /= 10;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::string to_string(i128 v) {
  if (v < 0) return "-" + to_string(uabs(v));
  return to_string(u128(v));
}

i128 parse_i128(std::string_view text) {
  std::size_t pos = 0;
  bool negative = false;
  if (pos < text.size() && (text[pos] == '-' || text[pos] == '+')) {
    negative = text[pos] == '-';
    ++pos;
  }
  if (pos == text.size()) fail(Errc::parse_error, "expected an integer, got '" + std::string(text) + "'");
  constexpr u128 limit = u128(1) << 127;
  u128 acc = 0;
  for (; pos < text.size(); ++pos) {
    char ch = text[pos];
    if (ch < '0' || ch > '9') fail(Errc::parse_error, "bad digit in '" + std::string(text) + "'");
    acc = acc * 10 + u128(ch - '0');
    if (acc > limit) fail(Errc::overflow, "integer out of range: " + std::string(text));
  }
  if (!negative && acc == limit) fail(Errc::overflow, "integer out of range: " + std::string(text));
  return negative ? i128(u128(0) - acc) : i128(acc);
}

i128 checked_add(i128 a, i128 b) {
  i128 r;
  if (__builtin_add_overflow(a, b, &r)) fail(Errc::overflow, "128-bit addition overflow");
  return r;
}

i128 checked_sub(i128 a, i128 b) {
  i128 r;
  if (__builtin_sub_overflow(a, b, &r)) fail(Errc::overflow, "128-bit subtraction overflow");
  return r;
}

i128 checked_mul(i128 a, i128 b) {
  i128 r;
  if (__builtin_mul_overflow(a, b, &r)) fail(Errc::overflow, "128-bit multiplication overflow");
  return r;
}

i128 checked_pow(i128 base, unsigned exp) {
  i128 r = 1;
  while (exp-- > 0) r = checked_mul(r, base);
  return r;
}

u128 gcd(u128 a, u128 b) {
  if (a == 0) return b;
  if (b == 0) return a;
  auto ctz = [](u128 v) {
    u64 lo = u64(v);
    return lo != 0 ? std::countr_zero(lo) : 64 + std::countr_zero(u64(v >> 64));
  };
  int shift = ctz(a | b);
  a >>= ctz(a);
  do {
    b >>= ctz(b);
    if (a > b) std::swap(a, b);
    b -= a;
  } while (b != 0);
  return a << shift;
}

}  // namespace trunclab

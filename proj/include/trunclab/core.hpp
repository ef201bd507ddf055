#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace trunclab {

using i64 = std::int64_t;
using u64 = std::uint64_t;
using i128 = __int128;
using u128 = unsigned __int128;

enum class Errc {
  zero_input,
  factorization_too_large,
  no_simple_root,
  precision_overflow,
  equals_target,
  on_divisor,
  equals_point,
  bad_params,
  bad_target,
  place_mismatch,
  empty_sample,
  product_is_one,
  no_crossover_in_range,
  dimension_mismatch,
  invalid_relation,
  one_sided_relation,
  indeterminacy_locus,
  on_z,
  parse_error,
  invariant_violation,
  overflow,
};

std::string_view errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] void fail(Errc code, const std::string& what);

std::string to_string(i128 v);
std::string to_string(u128 v);

// Accepts an optional sign followed by decimal digits.
i128 parse_i128(std::string_view text);

constexpr u128 uabs(i128 v) { return v < 0 ? u128(0) - u128(v) : u128(v); }

i128 checked_add(i128 a, i128 b);
i128 checked_sub(i128 a, i128 b);
i128 checked_mul(i128 a, i128 b);
i128 checked_pow(i128 base, unsigned exp);

u128 gcd(u128 a, u128 b);
inline i128 gcd(i128 a, i128 b) { return i128(gcd(uabs(a), uabs(b))); }

}  // namespace trunclab

#pragma once

#include <istream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trunclab/core.hpp"

namespace trunclab::divclass {

using ClassVector = std::vector<i64>;

// Integer coefficients, content 1, first nonzero entry positive.
struct Relation {
  std::vector<i128> coeffs;
  friend bool operator==(const Relation&, const Relation&) = default;
};

struct ClassInstance {
  unsigned rho = 0;
  std::vector<ClassVector> vectors;
};

// Least relation among the normalized reduced kernel basis; nullopt when the
// vectors are independent.
std::optional<Relation> integer_kernel(std::span<const ClassVector> vectors);
std::optional<Relation> integer_kernel(const ClassInstance& inst);

bool verify(const Relation& rel, std::span<const ClassVector> vectors);

bool guarantee_check(unsigned m, unsigned rank_pic0, unsigned rank_num);

std::vector<std::optional<Relation>> solve_batch(std::span<const ClassInstance> instances, unsigned jobs = 1);

struct MonomialFactor {
  std::size_t index;
  unsigned exponent;
  friend bool operator==(const MonomialFactor&, const MonomialFactor&) = default;
};

// f = prod forms[num]^e / prod forms[den]^e
struct MonomialMapSpec {
  std::vector<MonomialFactor> numerator;
  std::vector<MonomialFactor> denominator;

  unsigned numerator_degree() const;
  unsigned denominator_degree() const;
  // "0:2/1:1/2:1" style, as read by parse()
  std::string to_string() const;
  // "x0^2/(x1*x2)"
  std::string pretty() const;
  // "i:e[,i:e]/j:e[,j:e]"
  static MonomialMapSpec parse(std::string_view text);
};

// Forms are coefficient vectors; identical forms are merged before splitting.
MonomialMapSpec relation_to_map(const Relation& rel, std::span<const std::vector<i64>> forms);

// rho=<int>, then one space-separated vector per line; '#' starts a comment.
ClassInstance read_classes(std::istream& in);
std::string to_string(const Relation& rel);

}  // namespace trunclab::divclass

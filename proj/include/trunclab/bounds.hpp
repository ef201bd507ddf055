#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trunclab/core.hpp"
#include "trunclab/placeval.hpp"

namespace trunclab::bounds {

enum class Variant { thm1, thm1bis, coro_abc, stewart_yu, stewart_yu_p, coromain, eg_lemma, lw_conj, lw_lemma };

inline constexpr Variant kAllVariants[] = {Variant::thm1,         Variant::thm1bis,  Variant::coro_abc,
                                           Variant::stewart_yu,   Variant::stewart_yu_p, Variant::coromain,
                                           Variant::eg_lemma,     Variant::lw_conj,  Variant::lw_lemma};

// thm1 | thm1bis | coro-abc | sy | sy-p | coromain | eg | lw | lw-lemma
std::string_view variant_name(Variant v);
Variant parse_variant(std::string_view name);

struct BoundParams {
  long double epsilon = 1;
  long double kappa = 0;
  placeval::Place place = placeval::Place::infinity();
  Variant variant = Variant::thm1bis;

  void validate() const;
};

inline constexpr long double kInf = std::numeric_limits<long double>::infinity();

long double thm1_rhs(long double h, long double rad, const BoundParams& params);
long double thm1bis_rhs(long double h, long double n1, const BoundParams& params);
long double coro_abc_rhs(long double a, long double rad, const BoundParams& params);
// exp(kappa / eta * R^(...)), valid when a < c^(1 - eta).
long double coro_abc_eta_rhs(long double rad, long double eta, const BoundParams& params);
long double stewart_yu_rhs(long double rad, long double kappa);
long double stewart_yu_p_rhs(i128 a, i128 b, i128 c, long double kappa);
// exp(eps N1) + (log* hD)^(1 + eps) + kappa.
long double coromain_rhs(long double n1, long double hd, long double eps, long double kappa = 0);
long double eg_rhs(unsigned n, unsigned d, std::span<const long double> gen_heights, long double hx, long double kappa0);
// C max|b_j| / |b_1...b_n a_1...a_n|^(1 + eps)
long double lw_rhs(std::span<const i64> a, std::span<const i64> b, long double eps, long double c);
// |a_1^b_1 ... a_n^b_n - 1|, exactly rounded from a rational.
long double lw_lhs(std::span<const i64> a, std::span<const i64> b);
long double lw_lemma_rhs(long double n1, long double hx, long double eps, long double c);

// Exponent shapes used by crossover: the log of the exponent in the c-bound,
// as a function of u = log R.
long double coro_abc_log_exponent(long double log_r, long double eps, long double kappa);
long double stewart_yu_log_exponent(long double log_r, long double kappa);

// Inputs of one inequality instance. Fields a variant does not use are ignored.
struct BoundRecord {
  std::string id;
  long double lhs = 0;
  long double h = 0;        // h(x)
  long double n1 = 0;       // truncated counting value
  long double rad = 1;      // R
  long double a = 1;        // for coro-abc
  long double p_prime = 1;  // for sy-p
  long double hd = 0;       // h(O(D), x) for coromain
  long double shape = 1;    // eg: the bound with kappa0 = 1; lw: max|b| / |prod|^(1+eps)
};

// The bound for a record at the given parameters.
long double rhs(const BoundRecord& r, Variant v, long double eps, long double kappa);

// The constant at which the record's inequality becomes an equality, or
// nullopt for a vacuous record (it holds for every constant).
std::optional<long double> solve_constant(const BoundRecord& r, Variant v, long double eps);

// Variants whose constant is a lower bound (fitted as a minimum).
bool fits_minimum(Variant v);

struct FitResult {
  long double kappa_min = -kInf;
  std::size_t argmax = 0;
  std::string argmax_id;
  std::size_t sample_size = 0;
  std::size_t skipped = 0;
};

FitResult fit_kappa(std::span<const BoundRecord> records, Variant v, long double eps, unsigned jobs = 1);

// Streaming form of the same reduction.
class KappaFit {
 public:
  KappaFit(Variant v, long double eps) : variant_(v), eps_(eps) {}
  void add(const BoundRecord& r, std::size_t index);
  // Folds the candidate k at index i (used by fast paths that invert inline).
  void offer(long double k, std::size_t index, std::string_view id);
  bool would_take(long double k, std::size_t index) const;
  void skip() { ++result_.skipped; ++result_.sample_size; }
  void merge(const KappaFit& other);
  const FitResult& result() const { return result_; }
  FitResult finish() const;

 private:
  Variant variant_;
  long double eps_;
  FitResult result_;
  bool any_ = false;
};

using Shape = std::function<long double(long double log_r)>;

struct Crossover {
  long double r0;
  long double log_r0;
};

inline constexpr long double kGridMin = 10;
inline constexpr long double kGridFactor = 1.1L;
inline constexpr long double kGridMax = 1e300L;

// Least R0 on the geometric grid with a(R) < b(R) at R0, 10 R0 and 100 R0.
Crossover crossover(const Shape& a, const Shape& b);
// Exponent shapes of two bound families (coro-abc, sy, sy-p, thm1, thm1bis).
Crossover crossover(Variant a, Variant b, const BoundParams& params);
Shape exponent_shape(Variant v, const BoundParams& params);

// Largest m <= limit violating omega(m) log log m < 2 log m (1 if none).
u64 omega_threshold(u64 limit);
// n (log* n) (16e)^(3n) < e^(12n), compared in log form.
bool elementary_bound_holds(unsigned n);

// Logs of the two sides of  prod_j log p_j <= ((log R) / n)^n,  R = prod_j p_j.
struct AmGm {
  long double log_product;
  long double log_mean_power;
};
AmGm amgm_majorization(std::span<const u64> primes);

}  // namespace trunclab::bounds

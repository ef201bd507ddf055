#include "trunclab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <thread>

#include <gmpxx.h>
#include <mpfr.h>

#include "trunclab/exactnum.hpp"

namespace trunclab::bounds {

using exactnum::logstar;
using exactnum::logstar_iter;

namespace {

constexpr struct {
  Variant v;
  std::string_view name;
} kNames[] = {{Variant::thm1, "thm1"},       {Variant::thm1bis, "thm1bis"},   {Variant::coro_abc, "coro-abc"},
              {Variant::stewart_yu, "sy"},   {Variant::stewart_yu_p, "sy-p"}, {Variant::coromain, "coromain"},
              {Variant::eg_lemma, "eg"},     {Variant::lw_conj, "lw"},        {Variant::lw_lemma, "lw-lemma"}};

void require(bool ok, const char* what) {
  if (!ok) fail(Errc::bad_params, what);
}

void require_eps(long double eps) { require(std::isfinite(eps) && eps > 0, "epsilon must be positive"); }

// exp(k * x) with 0 * inf read as 0.
long double scaled_exp(long double k, long double x) {
  if (k == 0) return 1;
  return std::exp(k * x);
}

// (1 + eps) log* t / log*_2 t * log*_3 t
long double iterated_shape(long double t, long double eps) {
  long double l1 = logstar(t);
  long double l2 = logstar(l1);
  long double l3 = logstar(l2);
  return (1 + eps) * l1 / l2 * l3;
}

// (log*_3 R) / (log*_2 R) from u = log R.
long double shape_ratio(long double log_r) {
  long double l2 = logstar(std::max(log_r, 1.0L));
  return logstar(l2) / l2;
}

long double mpq_to_ld(const mpq_class& q) {
  mpfr_t t;
  mpfr_init2(t, 128);
  mpfr_set_q(t, q.get_mpq_t(), MPFR_RNDN);
  long double out = mpfr_get_ld(t, MPFR_RNDN);
  mpfr_clear(t);
  return out;
}

void check_lw_inputs(std::span<const i64> a, std::span<const i64> b) {
  if (a.size() != b.size()) fail(Errc::dimension_mismatch, "lw: a and b differ in length");
  require(!a.empty(), "lw: empty term list");
  for (std::size_t i = 0; i < a.size(); ++i) {
    require(a[i] >= 1, "lw: a_i must be positive");
    require(b[i] != 0, "lw: b_i must be nonzero");
  }
  std::map<u128, i128> exps;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (auto [p, e] : exactnum::factorize(a[i]).entries()) exps[p] += i128(e) * b[i];
  if (std::all_of(exps.begin(), exps.end(), [](const auto& kv) { return kv.second == 0; }))
    fail(Errc::product_is_one, "lw: a_1^b_1 ... a_n^b_n = 1");
}

bool better(long double k, std::size_t i, long double best, std::size_t best_i, bool minimum) {
  if (k != best) return minimum ? k < best : k > best;
  return i < best_i;
}

}  // namespace

std::string_view variant_name(Variant v) {
  for (auto& n : kNames)
    if (n.v == v) return n.name;
  return "?";
}

Variant parse_variant(std::string_view name) {
  for (auto& n : kNames)
    if (n.name == name) return n.v;
  fail(Errc::bad_params, "unknown variant '" + std::string(name) + "'");
}

void BoundParams::validate() const {
  require_eps(epsilon);
  require(std::isfinite(kappa), "kappa must be finite");
  if (variant == Variant::stewart_yu_p || variant == Variant::coro_abc || variant == Variant::stewart_yu ||
      variant == Variant::lw_conj || variant == Variant::lw_lemma)
    require(place.is_archimedean(), "variant is stated at the archimedean place");
}

long double thm1_rhs(long double h, long double rad, const BoundParams& params) {
  params.validate();
  require(rad >= 1, "thm1: R must be >= 1");
  require(h >= 0, "thm1: height must be nonnegative");
  return logstar(h) * std::exp(iterated_shape(rad, params.epsilon) + params.kappa);
}

long double thm1bis_rhs(long double h, long double n1, const BoundParams& params) {
  params.validate();
  require(n1 >= 0, "thm1bis: N1 must be nonnegative");
  require(h >= 0, "thm1bis: height must be nonnegative");
  long double l1 = logstar(n1);
  long double l2 = logstar(l1);
  return logstar(h) * std::exp((1 + params.epsilon) * n1 / l1 * l2 + params.kappa);
}

long double coro_abc_rhs(long double a, long double rad, const BoundParams& params) {
  params.validate();
  require(a >= 1 && rad >= 1, "coro-abc: a and R must be >= 1");
  long double e = (1 + params.epsilon) * shape_ratio(std::log(rad));
  return a * scaled_exp(params.kappa, std::pow(rad, e));
}

long double coro_abc_eta_rhs(long double rad, long double eta, const BoundParams& params) {
  params.validate();
  require(rad >= 1, "coro-abc: R must be >= 1");
  require(eta > 0 && eta < 1, "coro-abc: eta must lie in (0, 1)");
  long double e = (1 + params.epsilon) * shape_ratio(std::log(rad));
  return scaled_exp(params.kappa / eta, std::pow(rad, e));
}

long double stewart_yu_rhs(long double rad, long double kappa) {
  require(rad >= 2, "sy: R must be >= 2");
  long double l = std::log(rad);
  return scaled_exp(kappa, std::cbrt(rad) * l * l * l);
}

long double stewart_yu_p_rhs(i128 a, i128 b, i128 c, long double kappa) {
  require(a >= 1 && b >= 1 && c >= 1, "sy-p: entries must be positive");
  require(gcd(a, b) == 1 && gcd(a, c) == 1 && gcd(b, c) == 1, "sy-p: triple must be coprime");
  u128 pa = exactnum::largest_prime_factor(a);
  u128 pb = exactnum::largest_prime_factor(b);
  u128 pc = exactnum::largest_prime_factor(c);
  long double p_prime = static_cast<long double>(std::min({pa, pb, pc}));
  i128 abc[] = {a, b, c};
  long double rad = static_cast<long double>(exactnum::radical_of_product(abc));
  return std::exp(p_prime * std::pow(rad, kappa * shape_ratio(std::log(rad))));
}

long double coromain_rhs(long double n1, long double hd, long double eps, long double kappa) {
  require_eps(eps);
  require(n1 >= 0 && hd >= 0, "coromain: N1 and hD must be nonnegative");
  return std::exp(eps * n1) + std::pow(logstar(hd), 1 + eps) + kappa;
}

long double eg_rhs(unsigned n, unsigned d, std::span<const long double> gen_heights, long double hx,
                   long double kappa0) {
  require(n >= 1 && d >= 1, "eg: n and d must be >= 1");
  if (gen_heights.size() != n) fail(Errc::dimension_mismatch, "eg: expected n generator heights");
  require(hx >= 0, "eg: h(x) must be nonnegative");
  if (kappa0 == 0) return 0;
  long double log_v = std::log(static_cast<long double>(n)) + std::log(logstar(n)) +
                      3.0L * n * std::log(16.0L * std::numbers::e_v<long double> * d) + std::log(logstar(hx));
  for (long double h : gen_heights) {
    require(h > 0, "eg: generator heights must be positive");
    log_v += std::log(h);
  }
  return kappa0 * std::exp(log_v);
}

long double lw_rhs(std::span<const i64> a, std::span<const i64> b, long double eps, long double c) {
  require(std::isfinite(eps) && eps >= 0, "lw: epsilon must be nonnegative");
  check_lw_inputs(a, b);
  long double max_b = 0, log_prod = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    long double bi = std::fabs(static_cast<long double>(b[i]));
    max_b = std::max(max_b, bi);
    log_prod += std::log(bi) + std::log(static_cast<long double>(a[i]));
  }
  return c * max_b * std::exp(-(1 + eps) * log_prod);
}

long double lw_lhs(std::span<const i64> a, std::span<const i64> b) {
  check_lw_inputs(a, b);
  long double bits = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    bits += std::fabs(static_cast<long double>(b[i])) * std::log2(static_cast<long double>(a[i]));
  if (bits > (1 << 24)) fail(Errc::overflow, "lw: product too large to evaluate exactly");
  mpq_class prod(1);
  for (std::size_t i = 0; i < a.size(); ++i) {
    mpz_class pw;
    mpz_ui_pow_ui(pw.get_mpz_t(), static_cast<unsigned long>(a[i]), static_cast<unsigned long>(std::llabs(b[i])));
    prod *= b[i] > 0 ? mpq_class(pw) : mpq_class(1, pw);
  }
  prod.canonicalize();
  return mpq_to_ld(abs(prod - 1));
}

long double lw_lemma_rhs(long double n1, long double hx, long double eps, long double c) {
  require_eps(eps);
  require(n1 >= 0 && hx >= 0, "lw-lemma: N1 and h(x) must be nonnegative");
  return (1 + eps) * n1 + eps * hx + c;
}

long double coro_abc_log_exponent(long double log_r, long double eps, long double kappa) {
  require(kappa > 0, "coro-abc exponent needs kappa > 0");
  return std::log(kappa) + (1 + eps) * log_r * shape_ratio(log_r);
}

long double stewart_yu_log_exponent(long double log_r, long double kappa) {
  require(kappa > 0 && log_r > 0, "sy exponent needs kappa > 0 and R > 1");
  return std::log(kappa) + log_r / 3 + 3 * std::log(log_r);
}

long double rhs(const BoundRecord& r, Variant v, long double eps, long double kappa) {
  BoundParams p{eps, kappa, placeval::Place::infinity(), v};
  switch (v) {
    case Variant::thm1: return thm1_rhs(r.h, r.rad, p);
    case Variant::thm1bis: return thm1bis_rhs(r.h, r.n1, p);
    case Variant::coro_abc: return coro_abc_rhs(r.a, r.rad, p);
    case Variant::stewart_yu: return stewart_yu_rhs(r.rad, kappa);
    case Variant::stewart_yu_p:
      require(r.rad >= 1, "sy-p: R must be >= 1");
      return std::exp(r.p_prime * std::pow(r.rad, kappa * shape_ratio(std::log(r.rad))));
    case Variant::coromain: return coromain_rhs(r.n1, r.hd, eps, kappa);
    case Variant::eg_lemma: return kappa * r.shape;
    case Variant::lw_conj: return kappa * r.shape;
    case Variant::lw_lemma: return lw_lemma_rhs(r.n1, r.h, eps, kappa);
  }
  return 0;
}

bool fits_minimum(Variant v) { return v == Variant::lw_conj; }

std::optional<long double> solve_constant(const BoundRecord& r, Variant v, long double eps) {
  require_eps(eps);
  switch (v) {
    case Variant::thm1:
    case Variant::thm1bis: {
      if (r.lhs <= 0) return std::nullopt;
      long double s = v == Variant::thm1 ? iterated_shape(r.rad, eps) : [&] {
        long double l1 = logstar(r.n1);
        return (1 + eps) * r.n1 / l1 * logstar(l1);
      }();
      return std::log(r.lhs / logstar(r.h)) - s;
    }
    case Variant::coro_abc: {
      if (r.lhs <= 0) return std::nullopt;
      long double e = (1 + eps) * shape_ratio(std::log(r.rad));
      return std::log(r.lhs / r.a) / std::pow(r.rad, e);
    }
    case Variant::stewart_yu: {
      if (r.lhs <= 0) return std::nullopt;
      require(r.rad >= 2, "sy: R must be >= 2");
      long double l = std::log(r.rad);
      return std::log(r.lhs) / (std::cbrt(r.rad) * l * l * l);
    }
    case Variant::stewart_yu_p: {
      // exp(p' R^(k s)) tends to 1 as k -> -inf.
      if (r.lhs <= 1) return std::nullopt;
      require(r.rad >= 2, "sy-p: R must be >= 2");
      long double s = shape_ratio(std::log(r.rad));
      return std::log(std::log(r.lhs) / r.p_prime) / (s * std::log(r.rad));
    }
    case Variant::coromain: return r.lhs - coromain_rhs(r.n1, r.hd, eps, 0);
    case Variant::eg_lemma:
    case Variant::lw_conj:
      require(r.shape > 0, "record shape must be positive");
      return r.lhs / r.shape;
    case Variant::lw_lemma: return r.lhs - lw_lemma_rhs(r.n1, r.h, eps, 0);
  }
  return std::nullopt;
}

void KappaFit::offer(long double k, std::size_t index, std::string_view id) {
  ++result_.sample_size;
  if (would_take(k, index)) {
    any_ = true;
    result_.kappa_min = k;
    result_.argmax = index;
    result_.argmax_id = std::string(id);
  }
}

bool KappaFit::would_take(long double k, std::size_t index) const {
  return !any_ || better(k, index, result_.kappa_min, result_.argmax, fits_minimum(variant_));
}

void KappaFit::add(const BoundRecord& r, std::size_t index) {
  auto k = solve_constant(r, variant_, eps_);
  if (k)
    offer(*k, index, r.id);
  else
    skip();
}

void KappaFit::merge(const KappaFit& other) {
  std::size_t n = result_.sample_size + other.result_.sample_size;
  std::size_t s = result_.skipped + other.result_.skipped;
  if (other.any_ &&
      (!any_ || better(other.result_.kappa_min, other.result_.argmax, result_.kappa_min, result_.argmax,
                       fits_minimum(variant_)))) {
    result_ = other.result_;
    any_ = true;
  }
  result_.sample_size = n;
  result_.skipped = s;
}

FitResult KappaFit::finish() const {
  if (result_.sample_size == 0) fail(Errc::empty_sample, "fit_kappa: no records");
  FitResult out = result_;
  if (!any_) out.kappa_min = fits_minimum(variant_) ? kInf : -kInf;
  return out;
}

FitResult fit_kappa(std::span<const BoundRecord> records, Variant v, long double eps, unsigned jobs) {
  require_eps(eps);
  if (records.empty()) fail(Errc::empty_sample, "fit_kappa: no records");
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(records.size())));
  std::vector<KappaFit> parts(jobs, KappaFit(v, eps));
  std::size_t chunk = (records.size() + jobs - 1) / jobs;
  auto work = [&](unsigned j) {
    std::size_t lo = j * chunk, hi = std::min(records.size(), lo + chunk);
    for (std::size_t i = lo; i < hi; ++i) parts[j].add(records[i], i);
  };
  if (jobs == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(work, j);
  }
  for (unsigned j = 1; j < jobs; ++j) parts[0].merge(parts[j]);
  return parts[0].finish();
}

Crossover crossover(const Shape& a, const Shape& b) {
  auto below = [&](long double log_r) { return a(log_r) < b(log_r); };
  const long double step = std::log(kGridFactor), ten = std::log(10.0L);
  const long double top = std::log(kGridMax);
  for (long double u = std::log(kGridMin); u <= top; u += step) {
    if (below(u) && below(u + ten) && below(u + 2 * ten)) return {std::exp(u), u};
  }
  fail(Errc::no_crossover_in_range, "no persistent crossover for R in [10, 1e300]");
}

Shape exponent_shape(Variant v, const BoundParams& params) {
  params.validate();
  long double eps = params.epsilon, kappa = params.kappa;
  switch (v) {
    case Variant::coro_abc:
      return [=](long double u) { return coro_abc_log_exponent(u, eps, kappa); };
    case Variant::stewart_yu:
      return [=](long double u) { return stewart_yu_log_exponent(u, kappa); };
    case Variant::stewart_yu_p:
      // p' = 1
      return [=](long double u) { return kappa * u * shape_ratio(u); };
    case Variant::thm1:
    case Variant::thm1bis:
      return [=](long double u) {
        long double l1 = logstar(u);
        return (1 + eps) * u / l1 * logstar(l1) + kappa;
      };
    default: fail(Errc::bad_params, "crossover is defined for coro-abc, sy, sy-p, thm1, thm1bis");
  }
}

Crossover crossover(Variant a, Variant b, const BoundParams& params) {
  return crossover(exponent_shape(a, params), exponent_shape(b, params));
}

u64 omega_threshold(u64 limit) {
  // On [P_k, P_(k+1)) omega(m) <= k, and 2 log m - k log log m increases in m
  // once log m > k / 2, so each block is decided at its left end or by bisection.
  auto violates = [](u64 m, unsigned k) {
    long double lm = std::log(static_cast<long double>(m));
    return k * std::log(lm) >= 2 * lm;
  };
  u64 worst = 1;
  u64 primorial = 1;
  unsigned k = 0;
  for (u64 p = 2; primorial <= limit; ++p) {
    if (!exactnum::is_prime(p)) continue;
    u128 next = u128(primorial) * p;
    u64 lo = k == 0 ? 2 : primorial;
    u64 hi = next - 1 > limit ? limit : u64(next - 1);
    if (lo <= hi && violates(lo, k)) {
      u64 l = lo, h = hi;
      if (violates(h, k)) {
        l = h;
      } else {
        while (h - l > 1) {
          u64 mid = l + (h - l) / 2;
          (violates(mid, k) ? l : h) = mid;
        }
      }
      worst = std::max(worst, l);
    }
    if (next > limit) break;
    primorial = u64(next);
    ++k;
  }
  return worst;
}

bool elementary_bound_holds(unsigned n) {
  require(n >= 1, "n must be >= 1");
  long double ln = static_cast<long double>(n);
  long double lhs = std::log(ln) + std::log(logstar(ln)) + 3 * ln * std::log(16 * std::numbers::e_v<long double>);
  return lhs < 12 * ln;
}

AmGm amgm_majorization(std::span<const u64> primes) {
  require(!primes.empty(), "amgm: empty support");
  long double log_product = 0, log_r = 0;
  for (u64 p : primes) {
    require(p >= 2, "amgm: entries must be >= 2");
    long double lp = std::log(static_cast<long double>(p));
    log_product += std::log(lp);
    log_r += lp;
  }
  long double n = static_cast<long double>(primes.size());
  return {log_product, n * std::log(log_r / n)};
}

}  // namespace trunclab::bounds

#include "trunclab/placeval.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "bigfloat.hpp"
#include "trunclab/bigint.hpp"
#include "trunclab/exactnum.hpp"

namespace trunclab::placeval {

using detail::BigComplex;
using detail::BigFloat;
using cld = std::complex<long double>;

namespace {

std::vector<i64> normalized_poly(std::vector<i64> poly) {
  while (!poly.empty() && poly.back() == 0) poly.pop_back();
  if (poly.size() < 2) fail(Errc::bad_target, "minimal polynomial must have degree >= 1");
  if (poly.size() - 1 > kMaxDegree) fail(Errc::bad_target, "degree above " + std::to_string(kMaxDegree));
  if (poly.front() == 0) fail(Errc::bad_target, "constant term is zero (alpha = 0 or reducible)");
  i64 g = 0;
  for (i64 c : poly) g = std::gcd(g, c);
  i64 sign = poly.back() < 0 ? -1 : 1;
  for (i64& c : poly) c = c / g * sign;
  return poly;
}

// Horner evaluation of f and f' together with a running-error bound sum |a_i| |z|^i.
template <class C>
void horner(std::span<const i64> a, const C& z, C& f, C& df) {
  f = C(0);
  df = C(0);
  for (std::size_t i = a.size(); i-- > 0;) {
    df = df * z + f;
    f = f * z + C(static_cast<long double>(a[i]));
  }
}

struct Magnitudes {
  long double f;   // sum |a_i| |z|^i
  long double df;  // sum i |a_i| |z|^(i-1)
};

Magnitudes magnitudes(std::span<const i64> a, long double r) {
  Magnitudes m{0, 0};
  for (std::size_t i = a.size(); i-- > 0;) {
    m.df = m.df * r + m.f;
    m.f = m.f * r + std::fabs(static_cast<long double>(a[i]));
  }
  return m;
}

void horner_big(std::span<const i64> a, const BigComplex& z, BigComplex& f, BigComplex& df) {
  auto bits = z.re.prec();
  f = BigComplex(bits);
  df = BigComplex(bits);
  for (std::size_t i = a.size(); i-- > 0;) {
    df = df * z + f;
    f = f * z + BigComplex(BigFloat(static_cast<long double>(a[i]), bits), BigFloat(bits));
  }
}

// Radius of a disk around z guaranteed to contain a root:  d |f| / |f'|, with
// evaluation error folded in. Infinite when f' is not separated from zero.
long double root_radius(std::size_t d, long double abs_f, long double abs_df, Magnitudes m, long double unit) {
  long double gamma = 2.02L * d * unit;
  long double ef = gamma * m.f;
  long double edf = gamma * m.df;
  if (abs_df <= edf) return std::numeric_limits<long double>::infinity();
  return d * (abs_f + ef) / (abs_df - edf) * (1 + 1e-15L);
}

std::vector<cld> aberth(std::span<const i64> a) {
  std::size_t d = a.size() - 1;
  long double lead = std::fabs(static_cast<long double>(a[d]));
  long double r0 = std::pow(std::fabs(static_cast<long double>(a[0])) / lead, 1.0L / d);
  std::vector<cld> z(d);
  for (std::size_t k = 0; k < d; ++k) {
    long double th = 2 * std::numbers::pi_v<long double> * k / d + 0.4L;
    z[k] = std::polar(r0, th);
  }
  for (int it = 0; it < 800; ++it) {
    bool moved = false;
    for (std::size_t i = 0; i < d; ++i) {
      cld f, df;
      horner(a, z[i], f, df);
      if (f == cld(0)) continue;
      cld w = f / df;
      cld s = 0;
      for (std::size_t j = 0; j < d; ++j) {
        if (j != i) s += 1.0L / (z[i] - z[j]);
      }
      cld step = w / (1.0L - w * s);
      z[i] -= step;
      if (std::abs(step) > 1e-19L * std::max(1.0L, std::abs(z[i]))) moved = true;
    }
    if (!moved) break;
  }
  return z;
}

// Newton polish in MPFR; returns the refined root and its certified radius.
std::pair<BigComplex, long double> polish(std::span<const i64> a, cld start, unsigned bits) {
  BigComplex z(start, bits);
  BigComplex f(bits), df(bits);
  long double unit = std::ldexp(1.0L, 1 - int(bits));
  for (int it = 0; it < 200; ++it) {
    horner_big(a, z, f, df);
    if (f.re.is_zero() && f.im.is_zero()) break;
    BigComplex step = f / df;
    z = z - step;
    long double s = abs(step).to_ld();
    long double zz = abs(z).to_ld();
    if (s <= std::ldexp(std::max(zz, 1e-300L), 2 - int(bits))) break;
  }
  horner_big(a, z, f, df);
  long double rz = abs(z).to_ld();
  long double radius =
      root_radius(a.size() - 1, abs(f).to_ld(), abs(df).to_ld(), magnitudes(a, rz * (1 + 1e-15L)), unit);
  return {std::move(z), radius};
}

bool disks_disjoint(std::span<const RootDisk> disks) {
  for (std::size_t i = 0; i < disks.size(); ++i) {
    for (std::size_t j = i + 1; j < disks.size(); ++j) {
      if (std::abs(disks[i].center - disks[j].center) <= disks[i].radius + disks[j].radius) return false;
    }
  }
  return true;
}

long double ld_rounding(cld z) { return std::abs(z) * std::ldexp(1.0L, -62); }

}  // namespace

Place Place::prime(u64 p) {
  if (!exactnum::is_prime(p)) fail(Errc::bad_params, std::to_string(p) + " is not prime");
  return Place(p);
}

Place Place::parse(std::string_view text) {
  if (text == "inf" || text == "infty" || text == "oo") return infinity();
  i128 v = parse_i128(text);
  if (v < 2 || v > i128(~u64(0))) fail(Errc::parse_error, "bad place: " + std::string(text));
  return prime(u64(v));
}

std::string Place::to_string() const { return p_ == 0 ? "inf" : std::to_string(p_); }

int vp(i128 n, u64 p) {
  if (n == 0) fail(Errc::zero_input, "valuation of zero");
  u128 m = uabs(n);
  int v = 0;
  while (m % p == 0) {
    m /= p;
    ++v;
  }
  return v;
}

int vp(const Rational& x, u64 p) {
  if (x.is_zero()) fail(Errc::zero_input, "valuation of zero");
  return vp(x.num(), p) - vp(x.den(), p);
}

int vp(const mpz_class& n, u64 p) {
  if (n == 0) fail(Errc::zero_input, "valuation of zero");
  mpz_class pz(static_cast<unsigned long>(p));
  mpz_class m = abs(n);
  int v = 0;
  while (mpz_divisible_p(m.get_mpz_t(), pz.get_mpz_t())) {
    m /= pz;
    ++v;
  }
  return v;
}

long double log_abs(const Rational& x, const Place& v) {
  if (x.is_zero()) fail(Errc::zero_input, "absolute value of zero");
  if (v.is_archimedean()) return exactnum::log_u128(uabs(x.num())) - exactnum::log_u128(uabs(x.den()));
  return -vp(x, v.p()) * std::log(static_cast<long double>(v.p()));
}

std::vector<RootDisk> isolate_roots(std::span<const i64> poly) {
  std::size_t d = poly.size() - 1;
  if (d == 0) return {};
  std::vector<RootDisk> disks;
  if (d == 1) {
    long double r = -static_cast<long double>(poly[0]) / static_cast<long double>(poly[1]);
    disks.push_back({cld(r, 0), ld_rounding(r)});
    return disks;
  }
  auto approx = aberth(poly);
  bool ok = false;
  for (unsigned bits = 128; bits <= 512 && !ok; bits *= 2) {
    disks.clear();
    for (const auto& z0 : approx) {
      auto [z, r] = polish(poly, z0, bits);
      cld c = z.to_ld();
      disks.push_back({c, r + ld_rounding(c)});
    }
    ok = disks_disjoint(disks);
  }
  if (!ok) fail(Errc::precision_overflow, "could not separate the roots of the minimal polynomial");

  // A disk meeting only its own conjugate holds a real root.
  for (std::size_t i = 0; i < d; ++i) {
    cld conj = std::conj(disks[i].center);
    bool alone = true;
    for (std::size_t j = 0; j < d && alone; ++j) {
      if (j != i && std::abs(conj - disks[j].center) <= disks[i].radius + disks[j].radius) alone = false;
    }
    if (alone && std::fabs(disks[i].center.imag()) <= disks[i].radius) disks[i].center.imag(0);
  }
  // Snap conjugate pairs so their real parts compare equal.
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      cld c = std::conj(disks[j].center);
      if (disks[i].center.imag() != 0 && std::abs(disks[i].center - c) <= disks[i].radius + disks[j].radius) {
        disks[j].center = std::conj(disks[i].center);
      }
    }
  }
  std::sort(disks.begin(), disks.end(), [](const RootDisk& x, const RootDisk& y) {
    if (x.center.real() != y.center.real()) return x.center.real() < y.center.real();
    return x.center.imag() < y.center.imag();
  });
  return disks;
}

namespace {

// Exact test that g divides f over Q (g with integer coefficients).
bool divides(std::span<const i64> f, const std::vector<mpz_class>& g) {
  std::vector<mpq_class> rem(f.begin(), f.end());
  std::size_t dg = g.size() - 1;
  for (std::size_t i = rem.size(); i-- > dg;) {
    mpq_class q = rem[i] / mpq_class(g[dg]);
    for (std::size_t j = 0; j <= dg; ++j) rem[i - dg + j] -= q * g[j];
  }
  for (std::size_t i = 0; i < dg; ++i) {
    if (rem[i] != 0) return false;
  }
  return true;
}

bool reducible_by_subsets(std::span<const i64> f, std::span<const RootDisk> roots) {
  std::size_t d = f.size() - 1;
  std::vector<i64> leads{1};
  for (const auto& e : exactnum::factorize(f[d]).entries()) {
    std::size_t n = leads.size();
    i64 pk = 1;
    for (unsigned j = 0; j < e.exponent; ++j) {
      pk *= i64(e.prime);
      for (std::size_t i = 0; i < n; ++i) leads.push_back(leads[i] * pk);
    }
  }
  for (std::size_t k = 1; k <= d / 2; ++k) {
    std::vector<bool> pick(d, false);
    std::fill(pick.begin(), pick.begin() + long(k), true);
    do {
      std::vector<cld> g{cld(1)};
      for (std::size_t i = 0; i < d; ++i) {
        if (!pick[i]) continue;
        std::vector<cld> next(g.size() + 1, cld(0));
        for (std::size_t j = 0; j < g.size(); ++j) {
          next[j + 1] += g[j];
          next[j] -= g[j] * roots[i].center;
        }
        g = std::move(next);
      }
      for (i64 l : leads) {
        std::vector<mpz_class> cand;
        bool near_integral = true;
        for (const cld& c : g) {
          cld v = c * static_cast<long double>(l);
          long double r = std::round(v.real());
          long double tol = 1e-6L * std::max(1.0L, std::fabs(r));
          if (std::fabs(v.imag()) > tol || std::fabs(v.real() - r) > tol || std::fabs(r) > 9e18L) {
            near_integral = false;
            break;
          }
          cand.emplace_back(static_cast<long>(r));
        }
        if (near_integral && divides(f, cand)) return true;
      }
    } while (std::prev_permutation(pick.begin(), pick.end()));
  }
  return false;
}

}  // namespace

bool is_irreducible(std::span<const i64> poly) {
  auto f = normalized_poly(std::vector<i64>(poly.begin(), poly.end()));
  if (f.size() == 2) return true;
  return !reducible_by_subsets(f, isolate_roots(f));
}

AlgebraicTarget AlgebraicTarget::rational(const Rational& value) {
  if (value.is_zero()) fail(Errc::bad_target, "target must be nonzero");
  const i128 lim = std::numeric_limits<i64>::max();
  if (value.num() > lim || value.num() < -lim || value.den() > lim) fail(Errc::overflow, "rational target too large");
  AlgebraicTarget t;
  t.poly_ = {-i64(value.num()), i64(value.den())};
  t.finish();
  return t;
}

AlgebraicTarget AlgebraicTarget::archimedean(std::vector<i64> poly, unsigned root_index) {
  AlgebraicTarget t;
  t.poly_ = normalized_poly(std::move(poly));
  if (root_index >= t.degree()) fail(Errc::bad_target, "root index out of range");
  t.root_index_ = root_index;
  t.finish();
  return t;
}

AlgebraicTarget AlgebraicTarget::padic(std::vector<i64> poly, u64 p, i64 seed) {
  AlgebraicTarget t;
  t.poly_ = normalized_poly(std::move(poly));
  t.embedding_ = Embedding::padic;
  t.prime_ = Place::prime(p).p();
  t.seed_ = seed;
  mpz_class pz(static_cast<unsigned long>(p));
  mpz_class s(static_cast<long>(seed));
  mpz_class f = t.eval_homogeneous(s, 1);
  mpz_class df = 0;
  for (std::size_t i = t.poly_.size(); i-- > 1;) df = df * s + mpz_class(static_cast<long>(t.poly_[i])) * long(i);
  if (!mpz_divisible_p(f.get_mpz_t(), pz.get_mpz_t()) || mpz_divisible_p(df.get_mpz_t(), pz.get_mpz_t())) {
    fail(Errc::no_simple_root, "seed " + std::to_string(seed) + " is not a simple root mod " + std::to_string(p));
  }
  t.finish();
  return t;
}

void AlgebraicTarget::finish() {
  roots_ = isolate_roots(poly_);
  if (degree() > 1 && reducible_by_subsets(poly_, roots_)) fail(Errc::bad_target, "minimal polynomial is reducible");
  long double m = std::log(static_cast<long double>(poly_.back()));
  for (const auto& r : roots_) m += std::max(0.0L, std::log(std::abs(r.center)));
  height_ = m / degree();
  if (is_rational()) {
    Rational v = as_rational();
    height_ = std::log(std::max(std::fabs(static_cast<long double>(v.num())), static_cast<long double>(v.den())));
  }
}

Rational AlgebraicTarget::as_rational() const {
  if (!is_rational()) fail(Errc::bad_target, "target is not rational");
  return Rational(-poly_[0], poly_[1]);
}

bool AlgebraicTarget::valid_at(const Place& v) const {
  if (is_rational()) return true;
  if (embedding_ == Embedding::archimedean) return v.is_archimedean();
  return !v.is_archimedean() && v.p() == prime_;
}

mpz_class AlgebraicTarget::eval_homogeneous(const mpz_class& b, const mpz_class& c) const {
  mpz_class acc = 0;
  mpz_class cpow = 1;
  // Horner in b with the matching power of c carried along.
  for (std::size_t i = poly_.size(); i-- > 0;) {
    acc = acc * b + mpz_class(static_cast<long>(poly_[i])) * cpow;
    cpow *= c;
  }
  return acc;
}

std::string AlgebraicTarget::to_string() const {
  std::string s = "poly:[";
  for (std::size_t i = 0; i < poly_.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(poly_[i]);
  }
  s += "];embed:";
  if (embedding_ == Embedding::archimedean) return s + "arch:" + std::to_string(root_index_);
  return s + "padic:" + std::to_string(prime_) + ":" + std::to_string(seed_);
}

AlgebraicTarget AlgebraicTarget::parse(std::string_view text) {
  auto bad = [&]() { fail(Errc::parse_error, "bad algebraic target: " + std::string(text)); };
  if (!text.starts_with("poly:[")) bad();
  auto close = text.find(']');
  if (close == std::string_view::npos) bad();
  std::vector<i64> poly;
  std::string_view body = text.substr(6, close - 6);
  while (!body.empty()) {
    auto comma = body.find(',');
    std::string_view item = body.substr(0, comma);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    i128 v = parse_i128(item);
    if (v > std::numeric_limits<i64>::max() || v < std::numeric_limits<i64>::min()) bad();
    poly.push_back(i64(v));
    if (comma == std::string_view::npos) break;
    body.remove_prefix(comma + 1);
  }
  std::string_view rest = text.substr(close + 1);
  if (rest.starts_with(";embed:arch:")) {
    i128 k = parse_i128(rest.substr(12));
    if (k < 0) bad();
    auto norm = normalized_poly(poly);
    if (norm.size() == 2) return rational(Rational(-norm[0], norm[1]));
    return archimedean(std::move(poly), unsigned(k));
  }
  if (rest.starts_with(";embed:padic:")) {
    rest.remove_prefix(13);
    auto colon = rest.find(':');
    if (colon == std::string_view::npos) bad();
    i128 p = parse_i128(rest.substr(0, colon));
    i128 seed = parse_i128(rest.substr(colon + 1));
    if (p < 2 || p > i128(~u64(0)) || seed > std::numeric_limits<i64>::max() || seed < std::numeric_limits<i64>::min()) {
      bad();
    }
    return padic(std::move(poly), u64(p), i64(seed));
  }
  fail(Errc::parse_error, "bad embedding in algebraic target: " + std::string(text));
}

PadicApprox hensel_lift(const AlgebraicTarget& target, unsigned k) {
  if (target.embedding() != AlgebraicTarget::Embedding::padic) {
    fail(Errc::place_mismatch, "target has no p-adic embedding");
  }
  if (k == 0) fail(Errc::bad_params, "precision must be positive");
  if (k > kMaxPrecision) fail(Errc::precision_overflow, "p-adic precision above " + std::to_string(kMaxPrecision));
  auto poly = target.minpoly();
  mpz_class pz(static_cast<unsigned long>(target.prime()));
  mpz_class r = mpz_class(static_cast<long>(target.seed())) % pz;
  if (r < 0) r += pz;
  unsigned cur = 1;
  while (cur < k) {
    cur = std::min(2 * cur, k);
    mpz_class mod;
    mpz_pow_ui(mod.get_mpz_t(), pz.get_mpz_t(), cur);
    mpz_class f = 0, df = 0;
    for (std::size_t i = poly.size(); i-- > 0;) {
      df = df * r + f;
      f = f * r + static_cast<long>(poly[i]);
    }
    mpz_class inv;
    if (mpz_invert(inv.get_mpz_t(), df.get_mpz_t(), mod.get_mpz_t()) == 0) {
      fail(Errc::no_simple_root, "derivative vanishes mod p");
    }
    r = (r - f * inv) % mod;
    if (r < 0) r += mod;
  }
  PadicApprox out;
  out.p = target.prime();
  out.k = k;
  mpz_pow_ui(out.modulus.get_mpz_t(), pz.get_mpz_t(), k);
  out.residue = r;
  return out;
}

namespace {

void check_not_target(const AlgebraicTarget& target, const Rational& x) {
  if (target.eval_homogeneous(to_mpz(x.num()), to_mpz(x.den())) == 0) {
    fail(Errc::equals_target, "x = " + x.to_string() + " is the target");
  }
}

}  // namespace

std::optional<int> val_diff_at(const AlgebraicTarget& target, const Rational& x, unsigned k) {
  check_not_target(target, x);
  if (target.is_rational()) {
    if (target.embedding() != AlgebraicTarget::Embedding::padic) {
      fail(Errc::place_mismatch, "rational target needs a prime; use vp directly");
    }
    return vp(target.as_rational() - x, target.prime());
  }
  if (target.embedding() != AlgebraicTarget::Embedding::padic) fail(Errc::place_mismatch, "target is archimedean");
  u64 p = target.prime();
  if (!x.is_zero() && vp(x, p) < 0) return vp(x, p);
  auto lift = hensel_lift(target, k);
  mpz_class xk;
  mpz_class den = to_mpz(x.den());
  if (mpz_invert(xk.get_mpz_t(), den.get_mpz_t(), lift.modulus.get_mpz_t()) == 0) {
    fail(Errc::invariant_violation, "denominator not invertible");
  }
  mpz_class diff = (lift.residue - to_mpz(x.num()) * xk) % lift.modulus;
  if (diff == 0) return std::nullopt;
  return vp(diff, p);
}

int val_diff(const AlgebraicTarget& target, const Rational& x) {
  for (unsigned k = kInitialPadicPrecision; k <= kMaxPrecision; k *= 2) {
    if (auto v = val_diff_at(target, x, k)) return *v;
  }
  fail(Errc::precision_overflow, "valuation exceeds p-adic precision cap");
}

DistEstimate arch_dist_at(const AlgebraicTarget& target, const Rational& x, unsigned bits) {
  check_not_target(target, x);
  if (target.is_rational()) {
    Rational diff = (target.as_rational() - x).abs();
    return {diff.to_long_double(), std::ldexp(1.0L, -62)};
  }
  if (target.embedding() != AlgebraicTarget::Embedding::archimedean) {
    fail(Errc::place_mismatch, "target is p-adic");
  }
  const auto& root = target.root();
  long double xv = x.to_long_double();
  if (bits <= 64) {
    long double dist = std::abs(root.center - xv);
    long double err = root.radius + ld_rounding(root.center) + std::fabs(xv) * std::ldexp(1.0L, -62);
    long double rel = dist > err ? err / (dist - err) : std::numeric_limits<long double>::infinity();
    return {dist, rel};
  }
  auto [z, r] = polish(target.minpoly(), root.center, bits);
  BigFloat xb = BigFloat(to_mpz(x.num()), bits) / BigFloat(to_mpz(x.den()), bits);
  BigComplex delta = z - BigComplex(xb, BigFloat(bits));
  long double dist = abs(delta).to_ld();
  long double rounding = std::ldexp(1.0L, 3 - int(bits)) * (abs(z).to_ld() + std::fabs(xv));
  long double err = r + rounding;
  long double rel = dist > err ? err / (dist - err) : std::numeric_limits<long double>::infinity();
  return {dist, rel};
}

DistEstimate arch_dist(const AlgebraicTarget& target, const Rational& x) {
  for (unsigned bits = 64; bits <= kMaxPrecision; bits *= 2) {
    auto est = arch_dist_at(target, x, bits);
    if (est.rel_error < kArchRelTolerance) return est;
  }
  fail(Errc::precision_overflow, "archimedean distance not resolved at " + std::to_string(kMaxPrecision) + " bits");
}

long double minus_log_dist(const AlgebraicTarget& target, const Rational& x, const Place& v) {
  if (!target.valid_at(v)) fail(Errc::place_mismatch, target.to_string() + " is not embedded at " + v.to_string());
  if (v.is_archimedean()) return -std::log(arch_dist(target, x).value);
  check_not_target(target, x);
  int val = target.is_rational() ? vp(target.as_rational() - x, v.p()) : val_diff(target, x);
  return val * std::log(static_cast<long double>(v.p()));
}

}  // namespace trunclab::placeval

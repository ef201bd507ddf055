#include "trunclab/diophfun.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "trunclab/bigint.hpp"

namespace trunclab::diophfun {

using exactnum::FormalLogSum;

namespace {

long double log_p(u64 p) { return std::log(static_cast<long double>(p)); }

std::vector<i128> primitive(std::vector<i128> v) {
  u128 g = 0;
  for (i128 c : v) g = gcd(g, uabs(c));
  if (g == 0) fail(Errc::bad_params, "all coefficients are zero");
  auto first = std::find_if(v.begin(), v.end(), [](i128 c) { return c != 0; });
  i128 sign = *first < 0 ? -1 : 1;
  for (i128& c : v) c = c / i128(g) * sign;
  return v;
}

std::vector<i128> form_of(const P1Target& t) {
  switch (t.kind()) {
    case P1Target::Kind::infinity:
      return {1, 0};
    case P1Target::Kind::rational:
      return {-t.value().num(), t.value().den()};
    case P1Target::Kind::algebraic: {
      auto mp = t.target().minpoly();
      return std::vector<i128>(mp.begin(), mp.end());
    }
  }
  return {};
}

std::string label_of(const P1Target& t) {
  switch (t.kind()) {
    case P1Target::Kind::infinity:
      return "inf";
    case P1Target::Kind::rational:
      return t.value().to_string();
    case P1Target::Kind::algebraic:
      return t.target().to_string();
  }
  return {};
}

void require_p1(const ProjPoint& x) {
  if (x.dim() != 1) fail(Errc::dimension_mismatch, "expected a point of P^1, got " + x.to_string());
}

// Primes dividing n; n must fit in 128 bits.
void add_primes(const mpz_class& n, std::vector<u128>& out) {
  auto m = abs_to_u128(n);
  if (!m) fail(Errc::factorization_too_large, "value exceeds 128 bits");
  for (const auto& e : exactnum::factorize_magnitude(*m).entries()) out.push_back(e.prime);
}

std::string trim(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  return std::string(s);
}

// Splits on '+' outside brackets.
std::vector<std::string> split_terms(std::string_view body) {
  std::vector<std::string> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < body.size(); ++i) {
    char ch = body[i];
    if (ch == '[') ++depth;
    if (ch == ']') --depth;
    if (ch == '+' && depth == 0) {
      out.push_back(trim(body.substr(start, i - start)));
      start = i + 1;
    }
  }
  out.push_back(trim(body.substr(start)));
  return out;
}

std::pair<unsigned, std::string> split_multiplicity(const std::string& term) {
  auto star = term.find('*');
  if (star == std::string::npos || term.find('[') < star) return {1, term};
  i128 m = parse_i128(trim(std::string_view(term).substr(0, star)));
  if (m < 1 || m > 1'000'000) fail(Errc::parse_error, "bad multiplicity in " + term);
  return {unsigned(m), trim(std::string_view(term).substr(star + 1))};
}

std::vector<i128> parse_int_list(std::string_view text) {
  if (text.size() < 2 || text.front() != '[' || text.back() != ']') {
    fail(Errc::parse_error, "expected [..] list: " + std::string(text));
  }
  std::vector<i128> out;
  std::string_view body = text.substr(1, text.size() - 2);
  while (!body.empty()) {
    auto comma = body.find(',');
    out.push_back(parse_i128(trim(body.substr(0, comma))));
    if (comma == std::string_view::npos) break;
    body.remove_prefix(comma + 1);
  }
  return out;
}

}  // namespace

ProjPoint::ProjPoint(std::vector<i128> coords) {
  if (coords.size() < 2) fail(Errc::dimension_mismatch, "a projective point needs at least two coordinates");
  if (std::all_of(coords.begin(), coords.end(), [](i128 c) { return c == 0; })) {
    fail(Errc::zero_input, "all coordinates are zero");
  }
  coords_ = primitive(std::move(coords));
}

ProjPoint ProjPoint::from_rational(const Rational& x) { return ProjPoint({x.num(), x.den()}); }

ProjPoint ProjPoint::parse(std::string_view text) {
  std::string s = trim(text);
  std::string_view body = s;
  if (body.starts_with("[") && body.ends_with("]")) body = body.substr(1, body.size() - 2);
  std::vector<i128> coords;
  while (true) {
    auto colon = body.find(':');
    coords.push_back(parse_i128(trim(body.substr(0, colon))));
    if (colon == std::string_view::npos) break;
    body.remove_prefix(colon + 1);
  }
  return ProjPoint(std::move(coords));
}

u128 ProjPoint::max_abs() const {
  u128 m = 0;
  for (i128 c : coords_) m = std::max(m, uabs(c));
  return m;
}

std::string ProjPoint::to_string() const {
  std::string s = "[";
  for (std::size_t i = 0; i < coords_.size(); ++i) {
    if (i) s += ":";
    s += trunclab::to_string(coords_[i]);
  }
  return s + "]";
}

P1Target P1Target::infinity() {
  P1Target t;
  t.kind_ = Kind::infinity;
  return t;
}

P1Target P1Target::rational(const Rational& r) {
  P1Target t;
  t.value_ = r;
  return t;
}

P1Target P1Target::algebraic(const AlgebraicTarget& a) {
  if (a.is_rational()) return rational(a.as_rational());
  P1Target t;
  t.kind_ = Kind::algebraic;
  t.target_ = a;
  return t;
}

DivisorSpec DivisorSpec::p1(std::vector<std::pair<P1Target, unsigned>> entries) {
  DivisorSpec d;
  for (auto& [t, m] : entries) {
    if (m < 1) fail(Errc::bad_params, "multiplicity must be at least 1");
    d.points_.push_back({form_of(t), m, label_of(t)});
  }
  if (d.points_.empty()) fail(Errc::bad_params, "empty divisor");
  d.check_distinct();
  return d;
}

DivisorSpec DivisorSpec::hyperplanes(unsigned n, std::vector<Hyperplane> entries) {
  DivisorSpec d;
  d.kind_ = Kind::pn;
  d.dim_ = n;
  for (auto& h : entries) {
    if (h.coeffs.size() != n + 1) fail(Errc::dimension_mismatch, "hyperplane needs n+1 coefficients");
    if (h.multiplicity < 1) fail(Errc::bad_params, "multiplicity must be at least 1");
    h.coeffs = primitive(std::move(h.coeffs));
    d.planes_.push_back(std::move(h));
  }
  if (d.planes_.empty()) fail(Errc::bad_params, "empty divisor");
  d.check_distinct();
  return d;
}

void DivisorSpec::check_distinct() const {
  std::set<std::vector<i128>> seen;
  if (kind_ == Kind::p1) {
    for (const auto& e : points_) {
      if (!seen.insert(e.form).second) fail(Errc::bad_params, "repeated divisor entry " + e.label);
    }
  } else {
    for (const auto& h : planes_) {
      if (!seen.insert(h.coeffs).second) fail(Errc::bad_params, "repeated hyperplane");
    }
  }
}

DivisorSpec DivisorSpec::parse(std::string_view text) {
  std::string s = trim(text);
  std::string_view sv = s;
  if (sv.starts_with("p1:")) {
    std::vector<std::pair<P1Target, unsigned>> entries;
    for (const auto& term : split_terms(sv.substr(3))) {
      auto [mult, item] = split_multiplicity(term);
      if (item.size() < 2 || item.front() != '[' || item.back() != ']') fail(Errc::parse_error, "bad P^1 entry " + item);
      std::string inner = trim(std::string_view(item).substr(1, item.size() - 2));
      P1Target t = P1Target::zero();
      if (inner == "inf" || inner == "infty" || inner == "oo") {
        t = P1Target::infinity();
      } else if (inner.starts_with("poly:")) {
        t = P1Target::algebraic(AlgebraicTarget::parse(inner));
      } else {
        t = P1Target::rational(Rational::parse(inner));
      }
      entries.emplace_back(std::move(t), mult);
    }
    return p1(std::move(entries));
  }
  if (sv.starts_with("pn:")) {
    std::vector<Hyperplane> planes;
    std::size_t n = 0;
    for (const auto& term : split_terms(sv.substr(3))) {
      auto [mult, item] = split_multiplicity(term);
      if (!item.starts_with("hyp:")) fail(Errc::parse_error, "expected hyp:[..] in " + item);
      auto coeffs = parse_int_list(trim(std::string_view(item).substr(4)));
      if (n == 0) n = coeffs.size();
      if (coeffs.size() != n || n < 2) fail(Errc::dimension_mismatch, "hyperplanes of different dimensions");
      planes.push_back({std::move(coeffs), mult});
    }
    return hyperplanes(unsigned(n - 1), std::move(planes));
  }
  fail(Errc::parse_error, "divisor must start with p1: or pn:");
}

unsigned DivisorSpec::degree() const {
  unsigned deg = 0;
  if (kind_ == Kind::p1) {
    for (const auto& e : points_) deg += e.multiplicity * unsigned(e.form.size() - 1);
  } else {
    for (const auto& h : planes_) deg += h.multiplicity;
  }
  return deg;
}

std::string DivisorSpec::to_string() const {
  std::string s = kind_ == Kind::p1 ? "p1:" : "pn:";
  bool first = true;
  auto mult = [](unsigned m) { return m == 1 ? std::string() : std::to_string(m) + "*"; };
  if (kind_ == Kind::p1) {
    for (const auto& e : points_) {
      s += (first ? "" : "+") + mult(e.multiplicity) + "[" + e.label + "]";
      first = false;
    }
  } else {
    for (const auto& h : planes_) {
      s += (first ? "" : "+") + mult(h.multiplicity) + "hyp:[";
      for (std::size_t i = 0; i < h.coeffs.size(); ++i) s += (i ? "," : "") + trunclab::to_string(h.coeffs[i]);
      s += "]";
      first = false;
    }
  }
  return s;
}

FormalLogSum height_rational(const Rational& x) {
  return FormalLogSum::log_of(std::max(uabs(x.num()), uabs(x.den())));
}

FormalLogSum height_projective(const ProjPoint& x) { return FormalLogSum::log_of(x.max_abs()); }

FormalLogSum height_divisor(const DivisorSpec& d, const ProjPoint& x) {
  if (x.dim() != d.dim()) fail(Errc::dimension_mismatch, "point and divisor live in different spaces");
  return height_projective(x).scaled(d.degree());
}

mpz_class eval_form(std::span<const i128> form, const ProjPoint& x) {
  require_p1(x);
  mpz_class b = to_mpz(x[0]);
  mpz_class c = to_mpz(x[1]);
  mpz_class acc = 0;
  mpz_class cpow = 1;
  for (std::size_t i = form.size(); i-- > 0;) {
    acc = acc * b + to_mpz(form[i]) * cpow;
    cpow *= c;
  }
  return acc;
}

mpz_class eval_linear(std::span<const i128> coeffs, const ProjPoint& x) {
  if (coeffs.size() != x.coords().size()) fail(Errc::dimension_mismatch, "linear form and point differ in dimension");
  mpz_class acc = 0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) acc += to_mpz(coeffs[i]) * to_mpz(x[i]);
  return acc;
}

namespace {

// log(max|x_j|^deg * max|F_i| / |F(x)|) at infinity, or v_p(F(x)) at p; F(x) != 0.
WeilValue weil_from_value(const mpz_class& fx, unsigned deg, u128 x_max, u128 f_max, const Place& v) {
  WeilValue w{v, 0, 0};
  if (v.is_archimedean()) {
    long double raw = deg * exactnum::log_u128(x_max) + exactnum::log_u128(f_max) - log_abs(fx);
    w.value = std::max(0.0L, raw);
  } else {
    w.coef = placeval::vp(fx, v.p());
    w.value = w.coef * log_p(v.p());
  }
  return w;
}

u128 max_abs(std::span<const i128> v) {
  u128 m = 0;
  for (i128 c : v) m = std::max(m, uabs(c));
  return m;
}

}  // namespace

namespace {

// F(b, c) in 128 bits, or nullopt on overflow.
std::optional<i128> eval_form_small(std::span<const i128> form, const ProjPoint& x) {
  i128 acc = 0, cpow = 1;
  for (std::size_t i = form.size(); i-- > 0;) {
    i128 t;
    if (__builtin_mul_overflow(acc, x[0], &acc) || __builtin_mul_overflow(form[i], cpow, &t) ||
        __builtin_add_overflow(acc, t, &acc))
      return std::nullopt;
    if (i > 0 && __builtin_mul_overflow(cpow, x[1], &cpow)) return std::nullopt;
  }
  return acc;
}

}  // namespace

WeilValue weil_form(std::span<const i128> form, const ProjPoint& x, const Place& v) {
  require_p1(x);
  if (auto small = eval_form_small(form, x)) {
    if (*small == 0) fail(Errc::on_divisor, x.to_string() + " lies on the divisor");
    WeilValue w{v, 0, 0};
    if (v.is_archimedean()) {
      long double raw = (form.size() - 1) * exactnum::log_u128(x.max_abs()) + exactnum::log_u128(max_abs(form)) -
                        exactnum::log_u128(uabs(*small));
      w.value = std::max(0.0L, raw);
    } else {
      w.coef = placeval::vp(*small, v.p());
      w.value = w.coef * log_p(v.p());
    }
    return w;
  }
  mpz_class fx = eval_form(form, x);
  if (fx == 0) fail(Errc::on_divisor, x.to_string() + " lies on the divisor");
  return weil_from_value(fx, unsigned(form.size() - 1), x.max_abs(), max_abs(form), v);
}

WeilValue weil_hyperplane(std::span<const i128> coeffs, const ProjPoint& x, const Place& v) {
  mpz_class lx = eval_linear(coeffs, x);
  if (lx == 0) fail(Errc::on_divisor, x.to_string() + " lies on the hyperplane");
  return weil_from_value(lx, 1, x.max_abs(), max_abs(coeffs), v);
}

WeilValue weil_point(const P1Target& target, const ProjPoint& x, const Place& v) {
  require_p1(x);
  if (target.kind() != P1Target::Kind::algebraic) return weil_form(form_of(target), x, v);

  const AlgebraicTarget& alpha = target.target();
  if (!alpha.valid_at(v)) fail(Errc::place_mismatch, alpha.to_string() + " is not embedded at " + v.to_string());
  WeilValue w{v, 0, 0};
  bool at_infinity = x[1] == 0;
  if (v.is_archimedean()) {
    long double abs_alpha = std::abs(alpha.root().center);
    if (at_infinity) {
      w.value = exactnum::logplus(abs_alpha);
      return w;
    }
    Rational xr(x[0], x[1]);
    long double raw;
    try {
      raw = exactnum::logplus(std::fabs(xr.to_long_double())) + exactnum::logplus(abs_alpha) +
            placeval::minus_log_dist(alpha, xr, v);
    } catch (const Error& e) {
      if (e.code() == Errc::equals_target) fail(Errc::on_divisor, e.what());
      throw;
    }
    w.value = std::max(0.0L, raw);
    return w;
  }
  if (at_infinity) return w;
  Rational xr(x[0], x[1]);
  int vx = xr.is_zero() ? 0 : placeval::vp(xr, v.p());
  w.coef = std::max(0, -vx) + placeval::val_diff(alpha, xr);
  w.value = w.coef * log_p(v.p());
  return w;
}

WeilValue weil_point(const P1Target& target, const Rational& x, const Place& v) {
  return weil_point(target, ProjPoint::from_rational(x), v);
}

WeilValue weil(const DivisorSpec& d, const ProjPoint& x, const Place& v) {
  if (x.dim() != d.dim()) fail(Errc::dimension_mismatch, "point and divisor live in different spaces");
  WeilValue total{v, 0, 0};
  auto accumulate = [&](const WeilValue& w, unsigned m) {
    total.value += m * w.value;
    total.coef += m * w.coef;
  };
  if (d.kind() == DivisorSpec::Kind::p1) {
    for (const auto& e : d.points()) accumulate(weil_form(e.form, x, v), e.multiplicity);
  } else {
    for (const auto& h : d.planes()) accumulate(weil_hyperplane(h.coeffs, x, v), h.multiplicity);
  }
  if (!v.is_archimedean()) total.value = total.coef * log_p(v.p());
  return total;
}

long double proximity(const ProjPoint& p, const ProjPoint& x, const Place& v) {
  if (p.dim() != x.dim()) fail(Errc::dimension_mismatch, "points live in different spaces");
  constexpr u128 kSmall = u128(1) << 62;
  if (p.max_abs() < kSmall && x.max_abs() < kSmall) {
    bool any = false;
    long double m = 0;
    int mv = std::numeric_limits<int>::max();
    for (std::size_t i = 0; i < p.coords().size(); ++i) {
      for (std::size_t j = i + 1; j < p.coords().size(); ++j) {
        i128 t = p[i] * x[j] - p[j] * x[i];
        if (t == 0) continue;
        any = true;
        if (v.is_archimedean())
          m = std::max(m, exactnum::log_u128(uabs(t)));
        else
          mv = std::min(mv, placeval::vp(t, v.p()));
      }
    }
    if (!any) fail(Errc::equals_point, "x coincides with P");
    if (v.is_archimedean())
      return std::max(0.0L, exactnum::log_u128(p.max_abs()) + exactnum::log_u128(x.max_abs()) - m);
    return mv * log_p(v.p());
  }
  std::vector<mpz_class> cross;
  for (std::size_t i = 0; i < p.coords().size(); ++i) {
    for (std::size_t j = i + 1; j < p.coords().size(); ++j) {
      mpz_class t = to_mpz(p[i]) * to_mpz(x[j]) - to_mpz(p[j]) * to_mpz(x[i]);
      if (t != 0) cross.push_back(std::move(t));
    }
  }
  if (cross.empty()) fail(Errc::equals_point, "x coincides with P");
  if (v.is_archimedean()) {
    long double m = 0;
    for (const auto& t : cross) m = std::max(m, log_abs(t));
    return std::max(0.0L, exactnum::log_u128(p.max_abs()) + exactnum::log_u128(x.max_abs()) - m);
  }
  int mv = std::numeric_limits<int>::max();
  for (const auto& t : cross) mv = std::min(mv, placeval::vp(t, v.p()));
  return mv * log_p(v.p());
}

long double proximity(const AlgebraicTarget& alpha, const ProjPoint& x, const Place& v) {
  require_p1(x);
  if (alpha.is_rational()) return proximity(ProjPoint::from_rational(alpha.as_rational()), x, v);
  try {
    return weil_point(P1Target::algebraic(alpha), x, v).value;
  } catch (const Error& e) {
    if (e.code() == Errc::on_divisor) fail(Errc::equals_point, e.what());
    throw;
  }
}

std::vector<u128> support_primes(const DivisorSpec& d, const ProjPoint& x) {
  if (x.dim() != d.dim()) fail(Errc::dimension_mismatch, "point and divisor live in different spaces");
  std::vector<u128> primes;
  if (d.kind() == DivisorSpec::Kind::p1) {
    for (const auto& e : d.points()) {
      if (auto small = eval_form_small(e.form, x)) {
        if (*small == 0) fail(Errc::on_divisor, x.to_string() + " lies on [" + e.label + "]");
        for (const auto& f : exactnum::factorize(*small).entries()) primes.push_back(f.prime);
        continue;
      }
      mpz_class fx = eval_form(e.form, x);
      if (fx == 0) fail(Errc::on_divisor, x.to_string() + " lies on [" + e.label + "]");
      add_primes(fx, primes);
    }
  } else {
    for (const auto& h : d.planes()) {
      mpz_class lx = eval_linear(h.coeffs, x);
      if (lx == 0) fail(Errc::on_divisor, x.to_string() + " lies on a hyperplane of D");
      add_primes(lx, primes);
    }
  }
  std::sort(primes.begin(), primes.end());
  primes.erase(std::unique(primes.begin(), primes.end()), primes.end());
  return primes;
}

FormalLogSum truncated_counting(const DivisorSpec& d, const ProjPoint& x) {
  auto primes = support_primes(d, x);
  return FormalLogSum::of_primes(primes);
}

FormalLogSum truncated_counting(const DivisorSpec& d, const Rational& x) {
  return truncated_counting(d, ProjPoint::from_rational(x));
}

long double height_weil_consistency(const DivisorSpec& d, const ProjPoint& x) {
  long double h = height_divisor(d, x).evaluate();
  long double sum = weil(d, x, Place::infinity()).value;
  for (u128 p : support_primes(d, x)) sum += weil(d, x, Place::prime(u64(p))).value;
  return h - sum;
}

long double proximity_slack(const DivisorSpec& d, const ProjPoint& p, const Place& v) {
  if (p.dim() != d.dim()) fail(Errc::dimension_mismatch, "point and divisor live in different spaces");
  bool on = false;
  if (d.kind() == DivisorSpec::Kind::p1) {
    for (const auto& e : d.points()) on = on || eval_form(e.form, p) == 0;
  } else {
    for (const auto& h : d.planes()) on = on || eval_linear(h.coeffs, p) == 0;
  }
  if (!on) fail(Errc::bad_params, p.to_string() + " is not on the support of D");
  return v.is_archimedean() ? std::log(static_cast<long double>(d.dim() + 1)) : 0.0L;
}

namespace {

using Fp = std::vector<u64>;

u64 mulmod(u64 a, u64 b, u64 p) { return u64(u128(a) * b % p); }

u64 powmod(u64 a, u64 e, u64 p) {
  u64 r = 1 % p;
  while (e) {
    if (e & 1) r = mulmod(r, a, p);
    a = mulmod(a, a, p);
    e >>= 1;
  }
  return r;
}

void trim_fp(Fp& f) {
  while (!f.empty() && f.back() == 0) f.pop_back();
}

// Polynomial gcd over F_p.
Fp gcd_fp(Fp a, Fp b, u64 p) {
  trim_fp(a);
  trim_fp(b);
  while (!b.empty()) {
    u64 inv = powmod(b.back(), p - 2, p);
    while (a.size() >= b.size()) {
      u64 q = mulmod(a.back(), inv, p);
      std::size_t shift = a.size() - b.size();
      for (std::size_t i = 0; i < b.size(); ++i) a[shift + i] = (a[shift + i] + p - mulmod(q, b[i], p)) % p;
      trim_fp(a);
      if (a.empty()) break;
    }
    std::swap(a, b);
  }
  return a;
}

}  // namespace

long double orbit_constant(const AlgebraicTarget& alpha, const Place& v) {
  unsigned h = alpha.degree();
  if (h == 1) return 0;
  auto roots = alpha.roots();
  if (v.is_archimedean()) {
    long double big = 0;
    long double delta = std::numeric_limits<long double>::infinity();
    for (std::size_t i = 0; i < roots.size(); ++i) {
      big = std::max(big, std::abs(roots[i].center) + roots[i].radius);
      for (std::size_t j = i + 1; j < roots.size(); ++j) {
        delta = std::min(delta, std::abs(roots[i].center - roots[j].center) - roots[i].radius - roots[j].radius);
      }
    }
    long double near = std::log(2 * big + 1) + exactnum::logplus(big) - std::log(delta / 2);
    long double far = std::log(2.0L) + exactnum::logplus(big);
    return (h - 1) * std::max(near, far);
  }
  // Conjugates are pairwise p-adically separated when f mod p is separable of full degree.
  u64 p = v.p();
  auto mp = alpha.minpoly();
  Fp f, df;
  for (std::size_t i = 0; i < mp.size(); ++i) {
    i64 r = mp[i] % i64(p);
    f.push_back(u64(r < 0 ? r + i64(p) : r));
  }
  for (std::size_t i = 1; i < f.size(); ++i) df.push_back(mulmod(f[i], i % p, p));
  trim_fp(df);
  if (f.back() == 0 || df.empty() || gcd_fp(f, df, p).size() > 1) {
    fail(Errc::bad_params, "conjugates of " + alpha.to_string() + " are not separated mod " + std::to_string(p));
  }
  return 0;
}

}  // namespace trunclab::diophfun

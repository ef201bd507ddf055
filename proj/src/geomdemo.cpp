#include "trunclab/geomdemo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include <gmpxx.h>

#include "trunclab/bigint.hpp"

namespace trunclab::geomdemo {

namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

mpz_class eval_form(const std::vector<i64>& form, const ProjPoint& x) {
  mpz_class s = 0;
  for (std::size_t i = 0; i < form.size(); ++i) s += mpz_class(static_cast<long>(form[i])) * to_mpz(x[i]);
  return s;
}

std::vector<i64> primitive_form(std::vector<i64> f) {
  i64 g = 0;
  for (i64 c : f) g = std::gcd(g, c);
  if (g == 0) fail(Errc::bad_params, "zero linear form");
  auto lead = std::find_if(f.begin(), f.end(), [](i64 c) { return c != 0; });
  if (*lead < 0) g = -g;
  for (i64& c : f) c /= g;
  return f;
}

diophfun::DivisorSpec make_divisor(unsigned n, const std::vector<std::vector<i64>>& forms) {
  std::vector<diophfun::DivisorSpec::Hyperplane> planes;
  for (const auto& f : forms) planes.push_back({std::vector<i128>(f.begin(), f.end()), 1});
  return diophfun::DivisorSpec::hyperplanes(n, std::move(planes));
}

}  // namespace

DemoInstance::DemoInstance(unsigned n, std::vector<std::vector<i64>> forms, divclass::MonomialMapSpec map, ProjPoint p)
    : n_(n), map_(std::move(map)), p_(std::move(p)), alpha_(ProjPoint::infinity_p1()) {
  if (n < 1) fail(Errc::bad_params, "n must be >= 1");
  if (forms.size() < 2) fail(Errc::bad_params, "need at least two forms");
  for (auto& f : forms) {
    if (f.size() != n + 1) fail(Errc::dimension_mismatch, "form needs n+1 coefficients");
    forms_.push_back(primitive_form(std::move(f)));
  }
  if (std::set(forms_.begin(), forms_.end()).size() != forms_.size())
    fail(Errc::bad_params, "forms must be pairwise non-proportional");
  if (p_.dim() != n) fail(Errc::dimension_mismatch, "P has the wrong dimension");
  for (const auto& f : forms_)
    if (eval_form(f, p_) == 0) fail(Errc::on_divisor, "P lies on a component of D");

  std::vector<unsigned> exps(forms_.size(), 0);
  for (const auto* side : {&map_.numerator, &map_.denominator}) {
    for (const auto& fac : *side) {
      if (fac.index >= forms_.size()) fail(Errc::bad_params, "map refers to a missing form");
      if (exps[fac.index] != 0) fail(Errc::bad_params, "form used twice in the map");
      exps[fac.index] = fac.exponent;
    }
  }
  if (map_.numerator_degree() != map_.denominator_degree())
    fail(Errc::bad_params, "numerator and denominator degrees differ");
  m_ = *std::max_element(exps.begin(), exps.end());
  divisor_ = make_divisor(n, forms_);
  alpha_ = eval_map(*this, p_);
}

DemoInstance DemoInstance::parse(std::istream& in) {
  std::optional<unsigned> n;
  std::vector<std::vector<i64>> forms;
  std::optional<divclass::MonomialMapSpec> map;
  std::optional<ProjPoint> p;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    std::string t = trim(line);
    if (t.empty()) continue;
    auto eq = t.find('=');
    if (eq == std::string::npos) fail(Errc::parse_error, "line " + std::to_string(lineno) + ": expected key=value");
    std::string key = trim(std::string_view(t).substr(0, eq)), val = trim(std::string_view(t).substr(eq + 1));
    try {
      if (key == "n") {
        i128 v = parse_i128(val);
        if (v < 1 || v > 64) fail(Errc::parse_error, "n out of range");
        n = static_cast<unsigned>(v);
      } else if (key == "form") {
        std::vector<i64> f;
        std::stringstream ss(val);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
          i128 c = parse_i128(trim(tok));
          if (c > INT32_MAX || c < INT32_MIN) fail(Errc::parse_error, "coefficient out of range");
          f.push_back(static_cast<i64>(c));
        }
        forms.push_back(std::move(f));
      } else if (key == "map") {
        map = divclass::MonomialMapSpec::parse(val);
      } else if (key == "P") {
        p = ProjPoint::parse(val);
      } else {
        fail(Errc::parse_error, "unknown key '" + key + "'");
      }
    } catch (const Error& e) {
      if (e.code() == Errc::parse_error || e.code() == Errc::bad_params || e.code() == Errc::zero_input)
        fail(Errc::parse_error, "line " + std::to_string(lineno) + ": " + e.what());
      throw;
    }
  }
  if (!n || forms.empty() || !map || !p) fail(Errc::parse_error, "instance needs n, form, map and P");
  return DemoInstance(*n, std::move(forms), std::move(*map), std::move(*p));
}

namespace {

// Form values L_i(x) and f(x) for one point, in exact 128-bit arithmetic.
struct Evaluated {
  std::vector<i128> values;
  i128 num = 1, den = 1;  // before reduction
};

Evaluated evaluate(const DemoInstance& inst, const ProjPoint& x) {
  if (x.dim() != inst.n()) fail(Errc::dimension_mismatch, "point has the wrong dimension");
  Evaluated e;
  e.values.reserve(inst.forms().size());
  for (const auto& f : inst.forms()) {
    i128 s = 0;
    for (std::size_t i = 0; i < f.size(); ++i) s = checked_add(s, checked_mul(f[i], x[i]));
    e.values.push_back(s);
  }
  for (const auto& f : inst.map().numerator) e.num = checked_mul(e.num, checked_pow(e.values[f.index], f.exponent));
  for (const auto& f : inst.map().denominator) e.den = checked_mul(e.den, checked_pow(e.values[f.index], f.exponent));
  return e;
}

ProjPoint reduced(const Evaluated& e, const ProjPoint& x) {
  if (e.num == 0 && e.den == 0) fail(Errc::indeterminacy_locus, x.to_string() + " is a base point of f");
  return ProjPoint({e.num, e.den});
}

bool on_d(const Evaluated& e) {
  return std::any_of(e.values.begin(), e.values.end(), [](i128 v) { return v == 0; });
}

// Off D, so f(x) is defined.
bool on_pullback(const DemoInstance& inst, const ProjPoint& fx) {
  // the orbit of alpha is {alpha}; its pullback is  s * num - r * den = 0
  const ProjPoint& a = inst.alpha();
  i128 l, r;
  if (!__builtin_mul_overflow(a[1], fx[0], &l) && !__builtin_mul_overflow(a[0], fx[1], &r)) return l == r;
  return to_mpz(a[1]) * to_mpz(fx[0]) - to_mpz(a[0]) * to_mpz(fx[1]) == 0;
}

void add_primes(i128 v, std::vector<u128>& out) {
  if (v == 0) return;
  for (auto [p, k] : exactnum::factorize(v).entries()) out.push_back(p);
}

void sort_unique(std::vector<u128>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

long double log_sum(const std::vector<u128>& primes) {
  long double s = 0;
  for (u128 p : primes) s += exactnum::log_u128(p);
  return s;
}

}  // namespace

ProjPoint eval_map(const DemoInstance& inst, const ProjPoint& x) { return reduced(evaluate(inst, x), x); }

bool z_membership(const DemoInstance& inst, const ProjPoint& x) {
  Evaluated e = evaluate(inst, x);
  return on_d(e) || on_pullback(inst, reduced(e, x));
}

long double step_a_bound(const DemoInstance& inst) {
  auto side = [&](const std::vector<divclass::MonomialFactor>& fs) {
    long double s = 0;
    for (const auto& f : fs) {
      long double l1 = 0;
      for (i64 c : inst.forms()[f.index]) l1 += std::fabs(static_cast<long double>(c));
      s += f.exponent * std::log(l1);
    }
    return s;
  };
  return 2 * std::max(side(inst.map().numerator), side(inst.map().denominator));
}

PipelineReport pipeline_check(const DemoInstance& inst, const ProjPoint& x, const Place& v,
                              const PipelineParams& params) {
  Evaluated e = evaluate(inst, x);
  if (on_d(e)) fail(Errc::on_z, x.to_string() + " lies on supp(D)");
  ProjPoint fx = reduced(e, x);
  if (on_pullback(inst, fx)) fail(Errc::on_z, x.to_string() + " lies on the pullback of the orbit of alpha");
  PipelineReport r{x, fx};

  const long double hx = exactnum::log_u128(x.max_abs());
  const long double hd = inst.forms().size() * hx;
  r.a_lhs = 2 * exactnum::log_u128(fx.max_abs());
  r.a_rhs = inst.m() * hd;

  const auto alpha = diophfun::P1Target::rational(Rational(inst.alpha()[0], inst.alpha()[1]));
  r.b_lhs = diophfun::proximity(inst.p(), x, v);
  long double lam = diophfun::weil_point(alpha, fx, v).value;
  r.b_rhs = lam;
  r.c_sum = lam;
  r.c_max = lam;

  std::vector<u128> left, right;
  add_primes(fx[0], left);
  add_primes(fx[1], left);
  for (i128 val : e.values) add_primes(val, right);
  sort_unique(left);
  sort_unique(right);
  std::vector<u128> missing;
  std::set_difference(left.begin(), left.end(), right.begin(), right.end(), std::back_inserter(missing));
  r.d_lhs = log_sum(left);
  r.d_rhs = log_sum(right);
  r.d_excess = log_sum(missing);

  r.main_lhs = r.b_lhs;
  r.main_rhs = bounds::thm1bis_rhs(hd, r.d_rhs,
                                   bounds::BoundParams{params.epsilon, params.kappa, v, bounds::Variant::thm1bis});
  r.in_margin = r.main_lhs <= r.main_rhs;
  return r;
}

void for_each_point(unsigned n, unsigned h, const std::function<void(const ProjPoint&)>& fn) {
  if (h == 0) return;
  const i64 H = h;
  std::vector<i64> c(n + 1, -H);
  // odometer over [-H, H]^(n+1); keep primitive tuples whose first nonzero entry is positive
  while (true) {
    auto lead = std::find_if(c.begin(), c.end(), [](i64 v) { return v != 0; });
    if (lead != c.end() && *lead > 0) {
      i64 g = 0;
      for (i64 v : c) g = std::gcd(g, v);
      if (g == 1) fn(ProjPoint(std::vector<i128>(c.begin(), c.end())));
    }
    std::size_t i = n + 1;
    while (i > 0 && c[i - 1] == H) c[--i] = -H;
    if (i == 0) return;
    ++c[i - 1];
  }
}

namespace {

void fold(SlackMax& m, long double v, const ProjPoint& x) {
  if (v > m.value) {
    m.value = v;
    m.at = x;
  }
}

}  // namespace

SweepSummary sweep(const DemoInstance& inst, unsigned h, const Place& v, const PipelineParams& params,
                   const ReportSink& sink, unsigned jobs) {
  jobs = std::max(1u, jobs);
  SweepSummary out;
  bounds::KappaFit fit(bounds::Variant::thm1bis, params.epsilon);
  std::size_t index = 0;

  auto absorb = [&](const PipelineReport& r) {
    ++out.reports;
    fold(out.a, r.a_slack(), r.x);
    fold(out.b, r.b_slack(), r.x);
    fold(out.c, r.c_slack(), r.x);
    fold(out.d, r.d_excess, r.x);
    bounds::BoundRecord rec;
    rec.lhs = r.main_lhs;
    rec.h = inst.forms().size() * exactnum::log_u128(r.x.max_abs());
    rec.n1 = r.d_rhs;
    auto k = bounds::solve_constant(rec, bounds::Variant::thm1bis, params.epsilon);
    if (k)
      fit.offer(*k, index, fit.would_take(*k, index) ? r.x.to_string() : std::string());
    else
      fit.skip();
    ++index;
    if (!r.in_margin) {
      if (out.violations++ == 0) out.first_violation = r.x;
    }
    if (sink) sink(r);
  };

  // Points are batched; a batch is checked in parallel and absorbed in order.
  constexpr std::size_t kBatch = 1 << 14;
  std::vector<ProjPoint> batch;
  std::vector<std::optional<PipelineReport>> done;
  auto flush = [&] {
    done.assign(batch.size(), std::nullopt);
    std::vector<std::exception_ptr> errors(jobs);
    auto work = [&](unsigned j) {
      try {
        for (std::size_t i = j; i < batch.size(); i += jobs) {
          try {
            done[i] = pipeline_check(inst, batch[i], v, params);
          } catch (const Error& err) {
            // E lies inside supp(D), so base points are excluded with Z
            if (err.code() != Errc::on_z && err.code() != Errc::indeterminacy_locus) throw;
          }
        }
      } catch (...) {
        errors[j] = std::current_exception();
      }
    };
    if (jobs == 1) {
      work(0);
    } else {
      std::vector<std::jthread> pool;
      for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(work, j);
    }
    for (auto& err : errors)
      if (err) std::rethrow_exception(err);
    for (auto& d : done) {
      if (d)
        absorb(*d);
      else
        ++out.excluded;
    }
    batch.clear();
  };
  for_each_point(inst.n(), h, [&](const ProjPoint& x) {
    batch.push_back(x);
    if (batch.size() == kBatch) flush();
  });
  flush();
  if (out.reports > 0) out.kappa = fit.finish();
  return out;
}

void write_csv_header(std::ostream& out) {
  out << "x,fx,a_lhs,a_rhs,b_lhs,b_rhs,c_sum,c_max,d_lhs,d_rhs,main_lhs,main_rhs,in_margin\n";
}

void write_csv_row(std::ostream& out, const PipelineReport& r) {
  auto coords = [](const ProjPoint& p) {
    std::string s;
    for (std::size_t i = 0; i <= p.dim(); ++i) s += (i ? ":" : "") + to_string(p[i]);
    return s;
  };
  i128 fn = r.fx[1] < 0 ? -r.fx[0] : r.fx[0], fd = r.fx[1] < 0 ? -r.fx[1] : r.fx[1];
  std::string fx = fd == 0 ? "inf" : to_string(fn) + (fd == 1 ? "" : "/" + to_string(fd));
  char buf[64];
  auto num = [&](long double v) {
    std::snprintf(buf, sizeof buf, "%.12Lg", v);
    return std::string(buf);
  };
  out << coords(r.x) << ',' << fx;
  for (long double v : {r.a_lhs, r.a_rhs, r.b_lhs, r.b_rhs, r.c_sum, r.c_max, r.d_lhs, r.d_rhs, r.main_lhs, r.main_rhs})
    out << ',' << num(v);
  out << ',' << (r.in_margin ? 1 : 0) << '\n';
}

}  // namespace trunclab::geomdemo

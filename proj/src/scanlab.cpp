#include "trunclab/scanlab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include "trunclab/diophfun.hpp"
#include "trunclab/exactnum.hpp"

namespace trunclab::scanlab {

using bounds::Variant;
using diophfun::DivisorSpec;
using diophfun::ProjPoint;
using exactnum::FormalLogSum;
using exactnum::logstar;

std::string Triple::to_string() const {
  return "(" + std::to_string(a) + "," + std::to_string(b) + "," + std::to_string(c) + ")";
}

void validate(const Triple& t) {
  if (t.a == 0 || t.b == 0 || t.c == 0) fail(Errc::invariant_violation, "entries must be positive");
  if (t.a + t.b != t.c || t.c < t.a) fail(Errc::invariant_violation, "a + b != c");
  if (t.a >= t.b) fail(Errc::invariant_violation, "a >= b");
  if (std::gcd(t.a, t.b) != 1) fail(Errc::invariant_violation, "not coprime");
}

void enumerate_triples(u64 c_max, const TripleFn& fn) {
  std::vector<char> shared;
  std::vector<u64> primes;
  for (u64 c = 3; c <= c_max; ++c) {
    // mark a in [1, c/2) sharing a prime with c
    const u64 half = (c - 1) / 2;
    shared.assign(half + 1, 0);
    primes.clear();
    for (const auto& [p, e] : exactnum::factorize(i128(c)).entries()) primes.push_back(u64(p));
    for (u64 p : primes)
      for (u64 m = p; m <= half; m += p) shared[m] = 1;
    for (u64 a = 1; a <= half; ++a)
      if (!shared[a]) fn(Triple{a, c - a, c});
  }
}

std::size_t count_triples(u64 c_max) {
  std::size_t n = 0;
  for (u64 c = 3; c <= c_max; ++c) {
    u64 phi = c;
    for (const auto& [p, e] : exactnum::factorize(i128(c)).entries()) phi = phi / u64(p) * (u64(p) - 1);
    n += phi / 2;
  }
  return n;
}

namespace {

u64 parse_entry(std::string_view s, std::size_t line) {
  if (s.empty() || s.size() > 19 || !std::all_of(s.begin(), s.end(), [](char ch) { return ch >= '0' && ch <= '9'; }))
    fail(Errc::parse_error, "line " + std::to_string(line) + ": bad integer '" + std::string(s) + "'");
  return std::stoull(std::string(s));
}

}  // namespace

void ingest_triples(std::istream& in, const TripleFn& fn, const ErrorFn& on_error) {
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.empty() || text.front() == '#') continue;
    try {
      std::vector<std::string_view> parts;
      std::string_view rest = text;
      while (!rest.empty()) {
        auto sp = rest.find(' ');
        parts.push_back(rest.substr(0, sp));
        rest = sp == std::string_view::npos ? std::string_view() : rest.substr(sp + 1);
      }
      if (parts.size() != 3)
        fail(Errc::parse_error, "line " + std::to_string(line) + ": expected 'a b c'");
      Triple t{parse_entry(parts[0], line), parse_entry(parts[1], line), parse_entry(parts[2], line)};
      try {
        validate(t);
      } catch (const Error& e) {
        std::string which = std::string(e.what()).substr(errc_name(e.code()).size() + 2);
        fail(Errc::invariant_violation, "line " + std::to_string(line) + ": " + which);
      }
      fn(t);
    } catch (const Error& e) {
      if (!on_error) throw;
      on_error(e);
    }
  }
}

Source enumerated(u64 c_max) {
  return [c_max](const TripleFn& fn, const ErrorFn&) { enumerate_triples(c_max, fn); };
}

Source ingested(std::istream& in) {
  return [&in](const TripleFn& fn, const ErrorFn& on_error) { ingest_triples(in, fn, on_error); };
}

namespace {

const DivisorSpec& divisor(int which) {
  static const DivisorSpec specs[] = {
      DivisorSpec::parse("p1:[0]+[1]+[inf]"),
      DivisorSpec::parse("p1:[0]"),
      DivisorSpec::parse("p1:[1]"),
      DivisorSpec::parse("p1:[inf]"),
  };
  return specs[which];
}

std::vector<u128> prime_list(std::initializer_list<u64> ns) {
  std::vector<u128> out;
  for (u64 n : ns)
    for (const auto& [p, e] : exactnum::factorize(i128(n)).entries()) out.push_back(p);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<u128> primes_of(u64 n) {
  std::vector<u128> out;
  for (const auto& [p, e] : exactnum::factorize(i128(n)).entries()) out.push_back(p);
  return out;
}

long double log_rad(std::initializer_list<u64> ns) {
  long double s = 0;
  for (u128 p : prime_list(ns)) s += std::log((long double)p);
  return s;
}

}  // namespace

IdentityCheck check_identities(const Triple& t) {
  const ProjPoint x({i128(t.b), i128(t.c)});
  const auto pa = primes_of(t.a), pb = primes_of(t.b), pc = primes_of(t.c);
  std::vector<u128> all(pa);
  all.insert(all.end(), pb.begin(), pb.end());
  all.insert(all.end(), pc.begin(), pc.end());
  std::sort(all.begin(), all.end());
  auto n = [&](int which) { return diophfun::truncated_counting(divisor(which), x).normalized(); };
  IdentityCheck out;
  out.full = n(0) == FormalLogSum::of_primes(all);
  out.zero = n(1) == FormalLogSum::of_primes(pb);
  out.one = n(2) == FormalLogSum::of_primes(pa);
  out.infinity = n(3) == FormalLogSum::of_primes(pc);
  out.height = diophfun::height_projective(x).normalized() == FormalLogSum::log_of(t.c).normalized();
  return out;
}

bounds::BoundRecord bound_record(const Triple& t, Variant v, long double eps) {
  bounds::BoundRecord r;
  r.id = t.to_string();
  const long double la = std::log((long double)t.a), lc = std::log((long double)t.c);
  r.h = lc;
  r.n1 = log_rad({t.b, t.c});
  switch (v) {
    case Variant::thm1:
      r.lhs = lc - la;
      r.rad = std::exp(r.n1);
      break;
    case Variant::thm1bis:
    case Variant::lw_lemma:
      r.lhs = lc - la;
      break;
    case Variant::coro_abc:
    case Variant::stewart_yu:
    case Variant::stewart_yu_p: {
      r.lhs = (long double)t.c;
      r.a = (long double)t.a;
      const i128 parts[] = {i128(t.a), i128(t.b), i128(t.c)};
      r.rad = (long double)exactnum::radical_of_product(parts);
      u128 pp = ~u128(0);
      for (u64 n : {t.a, t.b, t.c}) pp = std::min(pp, n == 1 ? u128(1) : exactnum::largest_prime_factor(i128(n)));
      r.p_prime = (long double)pp;
      break;
    }
    case Variant::coromain:
      r.lhs = lc - la;
      r.hd = 2 * lc;
      break;
    case Variant::eg_lemma: {
      r.lhs = lc - la;
      std::vector<long double> heights;
      for (u128 p : prime_list({t.b, t.c})) heights.push_back(std::log((long double)p));
      r.shape = bounds::eg_rhs(unsigned(heights.size()), 1, heights, lc, 1);
      break;
    }
    case Variant::lw_conj: {
      // b/c = prod p^e, and |b/c - 1| = a/c
      r.lhs = (long double)t.a / (long double)t.c;
      std::vector<i64> bases, exps;
      for (const auto& [p, e] : exactnum::factorize(i128(t.b)).entries()) {
        bases.push_back(i64(p));
        exps.push_back(i64(e));
      }
      for (const auto& [p, e] : exactnum::factorize(i128(t.c)).entries()) {
        bases.push_back(i64(p));
        exps.push_back(-i64(e));
      }
      r.shape = bounds::lw_rhs(bases, exps, eps, 1);
      break;
    }
  }
  return r;
}

void ScanParams::validate() const {
  bounds::BoundParams{epsilon, kappa}.validate();
  if (!alpha && place.is_archimedean()) return;
  switch (variant) {
    case Variant::thm1:
    case Variant::thm1bis:
    case Variant::coromain:
    case Variant::eg_lemma:
    case Variant::lw_lemma: break;
    default:
      fail(Errc::bad_params, std::string(bounds::variant_name(variant)) + " does not take a target or place");
  }
}

diophfun::P1Target parse_target(std::string_view text) {
  if (text == "inf") return diophfun::P1Target::infinity();
  if (text.starts_with("poly:")) return diophfun::P1Target::algebraic(placeval::AlgebraicTarget::parse(text));
  return diophfun::P1Target::rational(Rational::parse(text));
}

TripleRecord evaluate_triple(const Triple& t, const ScanParams& params) {
  validate(t);
  TripleRecord r;
  r.t = t;
  const i128 parts[] = {i128(t.a), i128(t.b), i128(t.c)};
  r.rad = exactnum::radical_of_product(parts);
  const long double la = std::log((long double)t.a), lc = std::log((long double)t.c);
  r.quality = lc / exactnum::log_u128(r.rad);
  r.log_c_over_a = lc - la;
  r.h = lc;
  r.n1 = log_rad({t.b, t.c});
  r.eta = 1 - la / lc;
  r.bound = bound_record(t, params.variant, params.epsilon);
  if (params.alpha || !params.place.is_archimedean())
    r.bound.lhs = diophfun::weil_point(params.alpha.value_or(diophfun::P1Target::one()),
                                       ProjPoint({i128(t.b), i128(t.c)}), params.place)
                      .value;
  r.rhs = bounds::rhs(r.bound, params.variant, params.epsilon, params.kappa);
  r.identity = check_identities(t);
  return r;
}

ScanSummary scan(const Source& source, const ScanParams& params, const RecordSink& sink, unsigned jobs) {
  jobs = std::max(1u, jobs);
  params.validate();
  ScanSummary out;
  bounds::KappaFit fit(params.variant, params.epsilon);
  const bool lower = bounds::fits_minimum(params.variant);
  std::size_t index = 0;

  auto absorb = [&](const TripleRecord& r) {
    ++out.records;
    if (!r.identity.all()) ++out.identity_failures;
    if (!out.max_quality || r.quality > out.max_quality->quality) out.max_quality = r;
    auto k = bounds::solve_constant(r.bound, params.variant, params.epsilon);
    if (k)
      fit.offer(*k, index, r.bound.id);
    else
      fit.skip();
    ++index;
    const long double lhs = r.bound.lhs;
    if (lower ? lhs < r.rhs : lhs > r.rhs) ++out.violations;
    if (sink) sink(r);
  };

  struct Slot {
    std::optional<TripleRecord> record;
    std::string error;
  };
  constexpr std::size_t kBatch = 1 << 12;
  std::vector<Triple> batch;
  std::vector<Slot> done;
  auto flush = [&] {
    done.assign(batch.size(), Slot{});
    auto work = [&](unsigned j) {
      for (std::size_t i = j; i < batch.size(); i += jobs) {
        try {
          done[i].record = evaluate_triple(batch[i], params);
        } catch (const std::exception& e) {
          done[i].error = batch[i].to_string() + ": " + e.what();
        }
      }
    };
    if (jobs == 1) {
      work(0);
    } else {
      std::vector<std::jthread> pool;
      for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(work, j);
    }
    for (auto& d : done) {
      if (d.record)
        absorb(*d.record);
      else
        out.errors.push_back(std::move(d.error));
    }
    batch.clear();
  };
  // Source errors are ordered against the records around them.
  source(
      [&](const Triple& t) {
        batch.push_back(t);
        if (batch.size() == kBatch) flush();
      },
      [&](const Error& e) {
        flush();
        out.errors.push_back(e.what());
      });
  flush();
  if (out.records > 0) out.fit = fit.finish();
  return out;
}

namespace {

std::string num(long double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12Lg", v);
  return buf;
}

}  // namespace

void write_csv_header(std::ostream& out) {
  out << "a,b,c,rad,quality,log_c_over_a,h,n1,eta,lhs,rhs,identity\n";
}

void write_csv_row(std::ostream& out, const TripleRecord& r) {
  out << r.t.a << ',' << r.t.b << ',' << r.t.c << ',' << to_string(r.rad) << ',' << num(r.quality) << ','
      << num(r.log_c_over_a) << ',' << num(r.h) << ',' << num(r.n1) << ',' << num(r.eta) << ',' << num(r.bound.lhs)
      << ',' << num(r.rhs) << ',' << (r.identity.all() ? "true" : "false") << '\n';
}

void write_summary(std::ostream& out, const ScanSummary& s, const ScanParams& params) {
  out << "variant: " << bounds::variant_name(params.variant) << '\n';
  out << "epsilon: " << num(params.epsilon) << '\n';
  out << "kappa: " << num(params.kappa) << '\n';
  out << "records: " << s.records << '\n';
  out << "skipped: " << s.errors.size() << '\n';
  out << "identity_failures: " << s.identity_failures << '\n';
  out << "violations: " << s.violations << '\n';
  if (s.max_quality)
    out << "max_quality: " << s.max_quality->t.to_string() << ' ' << num(s.max_quality->quality) << '\n';
  if (s.fit) {
    out << "fitted_kappa: " << num(s.fit->kappa_min) << '\n';
    out << "fit_argmax: " << s.fit->argmax_id << '\n';
    out << "fit_vacuous: " << s.fit->skipped << '\n';
  }
  for (const auto& e : s.errors) out << "error: " << e << '\n';
}

RadicalSieve::RadicalSieve(std::uint32_t limit)
    : limit_(limit), spf_(limit + 1, 0), rad_(limit + 1, 1), log_rad_(limit + 1, 0), log_(limit + 1, 0) {
  for (std::uint32_t p = 2; p <= limit; ++p) {
    if (spf_[p]) continue;
    for (std::uint64_t m = p; m <= limit; m += p) {
      if (!spf_[m]) spf_[m] = p;
      rad_[m] *= p;
    }
  }
  for (std::uint32_t n = 1; n <= limit; ++n) {
    log_rad_[n] = std::log(double(rad_[n]));
    log_[n] = std::log(double(n));
  }
}

void RadicalSieve::primes(std::uint32_t n, std::vector<std::uint32_t>& out) const {
  out.clear();
  while (n > 1) {
    std::uint32_t p = spf_[n];
    out.push_back(p);
    while (n % p == 0) n /= p;
  }
}

namespace {

// (1 + eps) N / log* N * log* log* N, in double
inline double thm1bis_shape(double n1, double eps1) {
  const double l1 = n1 > M_E ? std::log(n1) : 1.0;
  const double l2 = l1 > M_E ? std::log(l1) : 1.0;
  return eps1 * n1 / l1 * l2;
}

// Calls fn(a, b, c) over the triples of each c in order, with sieve-backed
// coprimality.
template <class Fn>
void sieve_triples(const RadicalSieve& sieve, u64 c_max, Fn&& fn) {
  std::vector<char> shared;
  std::vector<std::uint32_t> primes;
  for (std::uint32_t c = 3; c <= c_max; ++c) {
    const std::uint32_t half = (c - 1) / 2;
    shared.assign(half + 1, 0);
    sieve.primes(c, primes);
    for (std::uint32_t p : primes)
      for (std::uint32_t m = p; m <= half; m += p) shared[m] = 1;
    for (std::uint32_t a = 1; a <= half; ++a)
      if (!shared[a]) fn(a, c - a, c);
  }
}

}  // namespace

SieveFit fit_thm1bis_sieve(u64 c_max, long double eps, const std::vector<u64>& checkpoints) {
  if (c_max < 3 || c_max > 100'000'000) fail(Errc::bad_params, "sieve fit: c_max out of range");
  bounds::BoundParams{eps, 0}.validate();
  RadicalSieve sieve{std::uint32_t(c_max)};
  const double eps1 = double(1 + eps);
  std::vector<u64> marks(checkpoints);
  std::sort(marks.begin(), marks.end());
  auto next_mark = marks.begin();

  SieveFit out;
  double best = -HUGE_VAL;
  std::uint32_t last_c = 0;
  auto solve = [&](const Triple& t) {
    return *bounds::solve_constant(bound_record(t, Variant::thm1bis, eps), Variant::thm1bis, eps);
  };
  auto close_marks = [&](u64 upto) {
    while (next_mark != marks.end() && *next_mark < upto) out.prefix[*next_mark++] = solve(out.argmax);
  };
  sieve_triples(sieve, c_max, [&](std::uint32_t a, std::uint32_t b, std::uint32_t c) {
    if (c != last_c) {
      close_marks(c);
      last_c = c;
    }
    ++out.triples;
    const double lc = sieve.log(c);
    const double lhs = lc - sieve.log(a);
    const double n1 = sieve.log_rad(b) + sieve.log_rad(c);
    const double k = std::log(lhs / (lc > M_E ? std::log(lc) : 1.0)) - thm1bis_shape(n1, eps1);
    // strict: ties keep the earliest triple
    if (k > best) {
      best = k;
      out.argmax = Triple{a, b, c};
    }
  });
  close_marks(c_max + 1);
  if (out.triples == 0) fail(Errc::empty_sample, "sieve fit: no triples");

  // the argmax is re-solved in extended precision
  auto rec = bound_record(out.argmax, Variant::thm1bis, eps);
  out.fit.kappa_min = *bounds::solve_constant(rec, Variant::thm1bis, eps);
  out.fit.argmax_id = rec.id;
  out.fit.sample_size = out.triples;
  return out;
}

std::size_t verify_thm1bis_sieve(u64 c_max, long double eps, long double kappa, double rel_tol) {
  if (c_max < 3 || c_max > 100'000'000) fail(Errc::bad_params, "sieve verify: c_max out of range");
  RadicalSieve sieve{std::uint32_t(c_max)};
  const double eps1 = double(1 + eps), k = double(kappa);
  std::size_t bad = 0;
  sieve_triples(sieve, c_max, [&](std::uint32_t a, std::uint32_t, std::uint32_t c) {
    const double lc = sieve.log(c);
    const double lhs = lc - sieve.log(a);
    const double n1 = sieve.log_rad(c - a) + sieve.log_rad(c);
    const double rhs = (lc > M_E ? std::log(lc) : 1.0) * std::exp(thm1bis_shape(n1, eps1) + k);
    if (lhs > rhs * (1 + rel_tol)) ++bad;
  });
  return bad;
}

ConstantsFile ConstantsFile::load(const std::string& path) {
  ConstantsFile out;
  std::ifstream in(path);
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.empty() || text.front() == '#') continue;
    auto eq = text.find('=');
    if (eq == std::string::npos) fail(Errc::parse_error, path + ":" + std::to_string(line) + ": expected key = value");
    auto hash = text.find('#', eq);
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(' '));
      s.erase(s.find_last_not_of(' ') + 1);
      return s;
    };
    std::string key = trim(text.substr(0, eq));
    std::string value = trim(text.substr(eq + 1, hash == std::string::npos ? std::string::npos : hash - eq - 1));
    std::string comment = hash == std::string::npos ? "" : trim(text.substr(hash + 1));
    try {
      std::size_t used = 0;
      long double v = std::stold(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
      out.entries_[key] = {v, comment};
    } catch (const std::exception&) {
      fail(Errc::parse_error, path + ":" + std::to_string(line) + ": bad value '" + value + "'");
    }
  }
  return out;
}

void ConstantsFile::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) fail(Errc::bad_params, "cannot write " + path);
  char buf[64];
  for (const auto& [key, e] : entries_) {
    std::snprintf(buf, sizeof buf, "%.17Lg", e.value);
    out << key << " = " << buf;
    if (!e.comment.empty()) out << " # " << e.comment;
    out << '\n';
  }
}

std::optional<ConstantsFile::Entry> ConstantsFile::get(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ConstantsFile::set(const std::string& key, long double value, const std::string& comment) {
  entries_[key] = {value, comment};
}

}  // namespace trunclab::scanlab

#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "trunclab/bounds.hpp"
#include "trunclab/core.hpp"
#include "trunclab/diophfun.hpp"

namespace trunclab::scanlab {

// a + b = c, gcd(a, b) = 1, a < b
struct Triple {
  u64 a = 0, b = 0, c = 0;
  friend bool operator==(const Triple&, const Triple&) = default;
  std::string to_string() const;
};

// Throws InvariantViolation naming the failed condition.
void validate(const Triple& t);

using TripleFn = std::function<void(const Triple&)>;
using ErrorFn = std::function<void(const Error&)>;

// Every triple with c <= c_max, ordered by (c, a).
void enumerate_triples(u64 c_max, const TripleFn& fn);
std::size_t count_triples(u64 c_max);

// Lines "a b c"; '#' lines are comments. Errors carry "line N"; they are
// thrown unless on_error is set.
void ingest_triples(std::istream& in, const TripleFn& fn, const ErrorFn& on_error = {});

struct ScanParams {
  bounds::Variant variant = bounds::Variant::thm1bis;
  long double epsilon = 1;
  long double kappa = 0;
  // Left side lambda_v(alpha, b/c); unset means alpha = 1 at infinity,
  // where it equals log(c/a). Only the variants bounding a Weil value take it.
  std::optional<diophfun::P1Target> alpha;
  placeval::Place place = placeval::Place::infinity();

  void validate() const;
};

// "inf", a rational "p/q", or "poly:[..];embed:..".
diophfun::P1Target parse_target(std::string_view text);

struct IdentityCheck {
  bool full = false;      // N([0]+[1]+[inf], b/c) = log rad(abc)
  bool zero = false;      // N([0], b/c) = log rad(b)
  bool one = false;       // N([1], b/c) = log rad(a)
  bool infinity = false;  // N([inf], b/c) = log rad(c)
  bool height = false;    // h(b/c) = log c
  bool all() const { return full && zero && one && infinity && height; }
};

struct TripleRecord {
  Triple t;
  u128 rad = 1;
  long double quality = 0;
  long double log_c_over_a = 0;  // -log|1 - b/c|
  long double h = 0;             // h(b/c) = log c
  long double n1 = 0;            // N([0]+[inf], b/c) = log rad(bc)
  long double eta = 0;           // 1 - log a / log c
  bounds::BoundRecord bound;     // inputs for params.variant
  long double rhs = 0;           // bound at params.kappa
  IdentityCheck identity;
};

// Exact identities via the general counting functions.
IdentityCheck check_identities(const Triple& t);
// Bound inputs for the triple under a variant (alpha = 1, v = inf).
bounds::BoundRecord bound_record(const Triple& t, bounds::Variant v, long double eps);
TripleRecord evaluate_triple(const Triple& t, const ScanParams& params);

struct ScanSummary {
  std::size_t records = 0;
  std::size_t identity_failures = 0;
  std::vector<std::string> errors;  // per-record failures, in source order
  std::optional<TripleRecord> max_quality;
  std::optional<bounds::FitResult> fit;
  std::size_t violations = 0;  // lhs above rhs at params.kappa (below, for lower bounds)
};

using RecordSink = std::function<void(const TripleRecord&)>;
using Source = std::function<void(const TripleFn&, const ErrorFn&)>;

Source enumerated(u64 c_max);
Source ingested(std::istream& in);

ScanSummary scan(const Source& source, const ScanParams& params, const RecordSink& sink = {}, unsigned jobs = 1);

void write_csv_header(std::ostream& out);
void write_csv_row(std::ostream& out, const TripleRecord& r);
void write_summary(std::ostream& out, const ScanSummary& s, const ScanParams& params);

// rad(n) and log rad(n) for n <= limit.
class RadicalSieve {
 public:
  explicit RadicalSieve(std::uint32_t limit);
  std::uint32_t rad(std::uint32_t n) const { return rad_[n]; }
  double log_rad(std::uint32_t n) const { return log_rad_[n]; }
  double log(std::uint32_t n) const { return log_[n]; }
  std::uint32_t limit() const { return limit_; }
  // Distinct prime factors of n, ascending.
  void primes(std::uint32_t n, std::vector<std::uint32_t>& out) const;

 private:
  std::uint32_t limit_;
  std::vector<std::uint32_t> spf_, rad_;
  std::vector<double> log_rad_, log_;
};

// thm1bis at alpha = 1, v = inf over every triple with c <= c_max, in
// double precision; the argmax is re-solved exactly by the library.
struct SieveFit {
  bounds::FitResult fit;
  Triple argmax;
  std::map<u64, long double> prefix;  // checkpoint c -> max over c' <= c
  std::size_t triples = 0;
};
SieveFit fit_thm1bis_sieve(u64 c_max, long double eps, const std::vector<u64>& checkpoints = {});
// Count of triples with lhs > rhs * (1 + rel_tol) at the given kappa.
std::size_t verify_thm1bis_sieve(u64 c_max, long double eps, long double kappa, double rel_tol = 1e-12);

// `key = value # comment` lines.
class ConstantsFile {
 public:
  struct Entry {
    long double value;
    std::string comment;
  };
  static ConstantsFile load(const std::string& path);  // missing file -> empty
  void save(const std::string& path) const;
  std::optional<Entry> get(const std::string& key) const;
  void set(const std::string& key, long double value, const std::string& comment);

 private:
  std::map<std::string, Entry> entries_;
};

}  // namespace trunclab::scanlab

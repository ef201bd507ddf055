#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "test_support.hpp"
#include "trunclab/exactnum.hpp"
#include "trunclab/scanlab.hpp"

using namespace trunclab;
using namespace trunclab::scanlab;
using bounds::Variant;
using placeval::Place;

namespace {

std::vector<Triple> collect(u64 c_max) {
  std::vector<Triple> out;
  enumerate_triples(c_max, [&](const Triple& t) { out.push_back(t); });
  return out;
}

std::vector<Triple> brute_force(u64 c_max) {
  std::vector<Triple> out;
  for (u64 c = 1; c <= c_max; ++c)
    for (u64 a = 1; a < c; ++a) {
      u64 b = c - a;
      if (a < b && std::gcd(a, b) == 1) out.push_back({a, b, c});
    }
  return out;
}

u64 rad_oracle(u64 n) {
  u64 r = 1;
  for (const auto& [p, e] : testsupport::trial_division(n)) r *= p;
  return r;
}

}  // namespace

TEST_CASE("enumeration matches brute force") {
  auto ten = collect(10);
  REQUIRE(ten.size() == 15);
  CHECK(ten.front() == Triple{1, 2, 3});
  CHECK(ten.back() == Triple{3, 7, 10});
  CHECK(collect(3) == std::vector<Triple>{{1, 2, 3}});
  CHECK(collect(2).empty());
  auto nine = collect(9);
  CHECK(std::find(nine.begin(), nine.end(), Triple{1, 8, 9}) != nine.end());
  for (u64 c_max : {3u, 4u, 10u, 57u, 300u}) {
    CHECK(collect(c_max) == brute_force(c_max));
    CHECK(count_triples(c_max) == brute_force(c_max).size());
  }
}

TEST_CASE("ingestion") {
  std::vector<Triple> got;
  std::istringstream ok("# header\n1 8 9\n\n5 27 32\n");
  ingest_triples(ok, [&](const Triple& t) { got.push_back(t); });
  CHECK(got == std::vector<Triple>{{1, 8, 9}, {5, 27, 32}});

  auto one = [](const char* text) {
    std::istringstream in(text);
    ingest_triples(in, [](const Triple&) {});
  };
  CHECK_ERRC(one("2 4 6\n"), Errc::invariant_violation);
  CHECK_ERRC(one("1 9 8\n"), Errc::invariant_violation);
  CHECK_ERRC(one("8 1 9\n"), Errc::invariant_violation);
  CHECK_ERRC(one("1 x 3\n"), Errc::parse_error);
  CHECK_ERRC(one("1 2\n"), Errc::parse_error);
  CHECK_ERRC(one("1  2 3\n"), Errc::parse_error);
  CHECK_ERRC(one("-1 2 1\n"), Errc::parse_error);

  std::vector<std::string> errors;
  std::istringstream mixed("1 2 3\n2 4 6\n# c\n1 9 8\nfoo\n1 8 9\n");
  got.clear();
  ingest_triples(mixed, [&](const Triple& t) { got.push_back(t); },
                 [&](const Error& e) { errors.push_back(e.what()); });
  CHECK(got.size() == 2);
  REQUIRE(errors.size() == 3);
  CHECK(errors[0].find("line 2: not coprime") != std::string::npos);
  CHECK(errors[1].find("line 4: a + b != c") != std::string::npos);
  CHECK(errors[2].find("ParseError: line 5") != std::string::npos);
}

TEST_CASE("worked triples") {
  auto r = evaluate_triple({1, 8, 9}, {});
  CHECK(r.rad == 6);
  CHECK(r.quality == doctest::Approx(1.22629).epsilon(1e-5));
  CHECK(r.log_c_over_a == doctest::Approx(std::log(9.0L)));
  CHECK(r.h == doctest::Approx(std::log(9.0L)));
  CHECK(r.n1 == doctest::Approx(std::log(6.0L)));
  CHECK(r.eta == 1);
  CHECK(r.identity.all());

  auto s = evaluate_triple({1, 2, 3}, {});
  CHECK(s.rad == 6);
  CHECK(s.quality == doctest::Approx(0.6131).epsilon(1e-4));

  auto u = evaluate_triple({1, 80, 81}, {});
  CHECK(u.rad == 30);
  CHECK(u.quality == doctest::Approx(1.2920).epsilon(1e-4));

  auto w = evaluate_triple({5, 27, 32}, {});
  CHECK(w.eta == doctest::Approx(1 - std::log(5.0L) / std::log(32.0L)));
  CHECK_ERRC(evaluate_triple({2, 4, 6}, {}), Errc::invariant_violation);
}

TEST_CASE("identity suite on random large triples") {
  for (int i = 0; i < 2000; ++i) {
    u64 c = u64(testsupport::uniform(3, 1'000'000'000'000LL));
    u64 a = u64(testsupport::uniform(1, (c - 1) / 2));
    if (std::gcd(a, c) != 1) continue;
    Triple t{a, c - a, c};
    IdentityCheck id = check_identities(t);
    CHECK(id.all());
    auto r = evaluate_triple(t, {});
    CHECK(r.rad == u128(rad_oracle(a)) * rad_oracle(c - a) * rad_oracle(c));
    CHECK(r.quality > 0);
  }
}

TEST_CASE("bound records invert at the solved constant") {
  const std::vector<Triple> sample{{1, 8, 9}, {5, 27, 32}, {1, 4374, 4375}, {3, 125, 128}, {7, 11, 18}, {1, 2, 3}};
  for (Variant v : bounds::kAllVariants) {
    for (const Triple& t : sample) {
      auto rec = bound_record(t, v, 1);
      auto k = bounds::solve_constant(rec, v, 1);
      if (!k) continue;
      CAPTURE(bounds::variant_name(v));
      CAPTURE(t.to_string());
      CHECK(bounds::rhs(rec, v, 1, *k) == doctest::Approx(rec.lhs).epsilon(1e-9));
    }
  }
  // (1, 2, 3): largest prime factors 1, 2, 3 so p' = 1
  CHECK(bound_record({1, 2, 3}, Variant::stewart_yu_p, 1).p_prime == 1);
  CHECK(bound_record({5, 27, 32}, Variant::stewart_yu_p, 1).p_prime == 2);
  CHECK(bound_record({1, 8, 9}, Variant::lw_conj, 1).lhs == doctest::Approx(1.0L / 9));
}

TEST_CASE("scan of the triples up to 10") {
  std::ostringstream triples;
  enumerate_triples(10, [&](const Triple& t) { triples << t.a << ' ' << t.b << ' ' << t.c << '\n'; });
  std::istringstream in(triples.str());
  std::ostringstream csv;
  write_csv_header(csv);
  ScanSummary s = scan(ingested(in), {}, [&](const TripleRecord& r) { write_csv_row(csv, r); });
  CHECK(s.records == 15);
  CHECK(s.identity_failures == 0);
  CHECK(s.errors.empty());
  std::istringstream lines(csv.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == "a,b,c,rad,quality,log_c_over_a,h,n1,eta,lhs,rhs,identity");
  int rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    CHECK(line.ends_with(",true"));
  }
  CHECK(rows == 15);
  REQUIRE(s.max_quality);
  CHECK(s.max_quality->t == Triple{1, 8, 9});
  REQUIRE(s.fit);
  CHECK(s.fit->argmax_id == "(1,8,9)");
}

TEST_CASE("scan is deterministic across workers") {
  for (Variant v : {Variant::thm1bis, Variant::coro_abc, Variant::lw_conj}) {
    auto run = [&](unsigned jobs) {
      std::ostringstream csv, summary;
      ScanParams p{v, 0.5L, 0.25L};
      ScanSummary s = scan(enumerated(400), p, [&](const TripleRecord& r) { write_csv_row(csv, r); }, jobs);
      write_summary(summary, s, p);
      return csv.str() + summary.str();
    };
    auto one = run(1);
    CHECK(run(2) == one);
    CHECK(run(8) == one);
  }
}

TEST_CASE("scan error handling") {
  std::istringstream empty("# nothing\n");
  ScanSummary s = scan(ingested(empty), {});
  CHECK(s.records == 0);
  CHECK_FALSE(s.fit);
  CHECK_ERRC(bounds::KappaFit(Variant::thm1bis, 1).finish(), Errc::empty_sample);

  std::istringstream mixed("1 2 3\n2 4 6\n1 8 9\n");
  std::vector<u64> order;
  s = scan(ingested(mixed), {}, [&](const TripleRecord& r) { order.push_back(r.t.c); });
  CHECK(s.records == 2);
  CHECK(s.errors.size() == 1);
  CHECK(order == std::vector<u64>{3, 9});
}

TEST_CASE("fitted kappa holds and tightens at its argmax") {
  ScanSummary s = scan(enumerated(200), {});
  REQUIRE(s.fit);
  ScanSummary at = scan(enumerated(200), {Variant::thm1bis, 1, s.fit->kappa_min});
  CHECK(at.violations == 0);
  ScanSummary below = scan(enumerated(200), {Variant::thm1bis, 1, s.fit->kappa_min - 1e-6L});
  CHECK(below.violations >= 1);
  // growing c_max only adds records
  long double prev = -bounds::kInf;
  for (u64 c : {10u, 50u, 100u, 400u}) {
    long double k = scan(enumerated(c), {}).fit->kappa_min;
    CHECK(k >= prev);
    prev = k;
  }
}

TEST_CASE("sieve fast path agrees with the exact scan") {
  for (u64 c_max : {20u, 300u, 2000u}) {
    ScanSummary s = scan(enumerated(c_max), {Variant::thm1bis, 1, 0});
    SieveFit f = fit_thm1bis_sieve(c_max, 1, {10, c_max / 2});
    CHECK(f.triples == s.records);
    CHECK(f.fit.argmax_id == s.fit->argmax_id);
    CHECK(f.fit.kappa_min == doctest::Approx(s.fit->kappa_min).epsilon(1e-12));
    CHECK(f.prefix.at(10) <= f.prefix.at(c_max / 2));
    CHECK(f.prefix.at(c_max / 2) <= f.fit.kappa_min);
    CHECK(verify_thm1bis_sieve(c_max, 1, f.fit.kappa_min) == 0);
    CHECK(verify_thm1bis_sieve(c_max, 1, f.fit.kappa_min - 1e-6L) >= 1);
  }
  SieveFit half = fit_thm1bis_sieve(500, 0.5L);
  CHECK(half.fit.kappa_min == doctest::Approx(scan(enumerated(500), {Variant::thm1bis, 0.5L, 0}).fit->kappa_min));
  CHECK_ERRC(fit_thm1bis_sieve(2, 1), Errc::bad_params);
}

TEST_CASE("radical sieve") {
  RadicalSieve sieve(5000);
  std::vector<std::uint32_t> ps;
  for (std::uint32_t n = 1; n <= 5000; ++n) {
    CHECK(sieve.rad(n) == rad_oracle(n));
    CHECK(sieve.log_rad(n) == doctest::Approx(std::log(double(rad_oracle(n)))));
    sieve.primes(n, ps);
    std::uint32_t prod = 1;
    for (auto p : ps) prod *= p;
    CHECK(prod == sieve.rad(n));
    CHECK(std::is_sorted(ps.begin(), ps.end()));
  }
}

TEST_CASE("constants file round trip") {
  auto path = (std::filesystem::temp_directory_path() / "trunclab_constants_test.txt").string();
  std::filesystem::remove(path);
  CHECK_FALSE(ConstantsFile::load(path).get("x"));
  ConstantsFile f;
  f.set("thm1bis.eps1.cmax100", -2.7963225404517834L, "(1,8,9)");
  f.set("omega.kappa2", 1, "");
  f.save(path);
  auto g = ConstantsFile::load(path);
  REQUIRE(g.get("thm1bis.eps1.cmax100"));
  CHECK(g.get("thm1bis.eps1.cmax100")->value == doctest::Approx(-2.7963225404517834L).epsilon(1e-16));
  CHECK(g.get("thm1bis.eps1.cmax100")->comment == "(1,8,9)");
  CHECK(g.get("omega.kappa2")->value == 1);
  {
    std::ofstream bad(path);
    bad << "k = nope\n";
  }
  CHECK_ERRC(ConstantsFile::load(path), Errc::parse_error);
  std::filesystem::remove(path);
}

TEST_CASE("targets and places") {
  ScanParams p;
  p.alpha = parse_target("1");
  Triple t{5, 27, 32};
  CHECK(evaluate_triple(t, p).bound.lhs == doctest::Approx(std::log(32.0L / 5)));
  p.place = Place::parse("3");
  // 1 - 125/128 = 3/128
  CHECK(evaluate_triple({3, 125, 128}, p).bound.lhs == doctest::Approx(std::log(3.0L)));
  p.place = Place::parse("2");
  CHECK(evaluate_triple(t, p).bound.lhs == 0);
  p.alpha = parse_target("inf");
  CHECK(evaluate_triple(t, p).bound.lhs == doctest::Approx(5 * std::log(2.0L)));
  p.place = Place::infinity();
  CHECK(evaluate_triple(t, p).bound.lhs == 0);
  ScanSummary s = scan(enumerated(60), p);
  CHECK(s.fit->skipped == s.records);
  p.alpha = parse_target("2/3");
  s = scan(enumerated(10), p);
  CHECK(s.errors.size() == 1);
  CHECK(s.errors[0].find("(1,2,3)") != std::string::npos);
  p.variant = Variant::coro_abc;
  CHECK_ERRC(scan(enumerated(10), p), Errc::bad_params);
  CHECK_ERRC(parse_target("x"), Errc::parse_error);
  CHECK(parse_target("poly:[-2,0,1];embed:arch:1").kind() == diophfun::P1Target::Kind::algebraic);
}

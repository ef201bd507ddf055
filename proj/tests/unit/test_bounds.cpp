#include <cmath>
#include <numbers>
#include <vector>

#include "test_support.hpp"
#include "trunclab/bounds.hpp"
#include "trunclab/exactnum.hpp"

using namespace trunclab;
using namespace trunclab::bounds;

namespace {

const long double e = std::numbers::e_v<long double>;

BoundParams params(Variant v, long double eps, long double kappa) {
  return BoundParams{eps, kappa, placeval::Place::infinity(), v};
}

// log*, written out independently of the library.
long double ls(long double t) { return t > e ? std::log(t) : 1.0L; }

BoundRecord random_record(std::size_t i) {
  BoundRecord r;
  r.id = "r" + std::to_string(i);
  r.rad = testsupport::uniform(2, 100000);
  r.n1 = std::log(r.rad);
  r.h = std::log((long double)testsupport::uniform(2, 1000000));
  r.a = testsupport::uniform(1, 50);
  r.lhs = testsupport::uniform(2, 1000000000);
  r.p_prime = testsupport::uniform(2, 50);
  r.hd = 2 * r.h;
  r.shape = 1.0L / testsupport::uniform(1, 1000);
  return r;
}

}  // namespace

TEST_CASE("variant names round-trip") {
  for (Variant v : kAllVariants) CHECK(parse_variant(variant_name(v)) == v);
  CHECK(parse_variant("coro-abc") == Variant::coro_abc);
  CHECK(parse_variant("sy-p") == Variant::stewart_yu_p);
  CHECK_ERRC(parse_variant("thm2"), Errc::bad_params);
}

TEST_CASE("thm1 and thm1bis worked values") {
  CHECK(thm1_rhs(std::log(9.0L), 6, params(Variant::thm1, 1, 0)) == doctest::Approx(36.0).epsilon(1e-14));
  CHECK(thm1_rhs(0, 1, params(Variant::thm1, 1, 0)) == doctest::Approx(std::exp(2.0)).epsilon(1e-14));
  CHECK(thm1_rhs(std::log(9.0L), 6, params(Variant::thm1, 1, 1)) == doctest::Approx(36.0 * std::exp(1.0)));

  CHECK(thm1bis_rhs(std::log(9.0L), std::log(6.0L), params(Variant::thm1bis, 1, 0)) == doctest::Approx(36.0));
  for (long double h : {0.0L, 1.0L, 5.0L, 1e6L})
    CHECK(thm1bis_rhs(h, 0, params(Variant::thm1bis, 1, 0)) == doctest::Approx(ls(h)));
  // exp(1.5 log 6) = 6^1.5
  CHECK(thm1bis_rhs(std::log(9.0L), std::log(6.0L), params(Variant::thm1bis, 0.5, 0)) ==
        doctest::Approx(std::pow(6.0, 1.5)));

  CHECK_ERRC(thm1_rhs(1, 0.5, params(Variant::thm1, 1, 0)), Errc::bad_params);
  CHECK_ERRC(thm1bis_rhs(1, 1, params(Variant::thm1bis, 0, 0)), Errc::bad_params);
  CHECK_ERRC(thm1bis_rhs(1, -1, params(Variant::thm1bis, 1, 0)), Errc::bad_params);
}

TEST_CASE("coro-abc and Stewart-Yu worked values") {
  CHECK(coro_abc_rhs(1, 6, params(Variant::coro_abc, 1, 1)) == doctest::Approx(std::exp(36.0L)));
  CHECK(coro_abc_rhs(1, 1, params(Variant::coro_abc, 1, 0)) == 1.0L);
  long double l30 = std::log(30.0L);
  long double expo = 2 / std::log(l30);
  long double v = coro_abc_rhs(5, 30, params(Variant::coro_abc, 1, 1));
  CHECK(std::log(v / 5) == doctest::Approx(std::pow(30.0L, expo)));
  CHECK(std::log(v / 5) == doctest::Approx(258.9).epsilon(1e-3));
  // eta form: kappa / eta in the exponent
  CHECK(coro_abc_eta_rhs(6, 0.5, params(Variant::coro_abc, 1, 1)) == doctest::Approx(std::exp(72.0L)));

  long double sy6 = stewart_yu_rhs(6, 1);
  CHECK(std::log(sy6) == doctest::Approx(std::cbrt(6.0L) * std::pow(std::log(6.0L), 3)));
  CHECK(std::log(sy6) == doctest::Approx(10.4531).epsilon(1e-4));
  CHECK(stewart_yu_rhs(e, 0) == 1.0L);
  CHECK(stewart_yu_p_rhs(1, 8, 9, 1) == doctest::Approx(std::exp(6.0L)));
  // p' = min(5, 3, 3)
  CHECK(std::log(stewart_yu_p_rhs(5, 27, 32, 0)) == doctest::Approx(2.0L));
  CHECK_ERRC(stewart_yu_rhs(1.5, 1), Errc::bad_params);
  CHECK_ERRC(stewart_yu_p_rhs(2, 4, 6, 1), Errc::bad_params);
}

TEST_CASE("overflow saturates") {
  long double big = coro_abc_rhs(1, 1e30L, params(Variant::coro_abc, 1, 1));
  CHECK(std::isinf(big));
  CHECK(coro_abc_rhs(1, 1e30L, params(Variant::coro_abc, 1, 0)) == 1.0L);
  CHECK(std::isinf(stewart_yu_rhs(1e30L, 1)));
}

TEST_CASE("coromain, EG and Lang-Waldschmidt worked values") {
  long double l = std::log(std::log(81.0L) * 2 / 2);
  CHECK(coromain_rhs(std::log(6.0L), 2 * std::log(9.0L), 1) == doctest::Approx(6 + l * l));
  CHECK(coromain_rhs(std::log(6.0L), 2 * std::log(9.0L), 1) == doctest::Approx(8.191).epsilon(1e-4));
  CHECK(coromain_rhs(0, 0, 1) == 2.0L);
  CHECK(coromain_rhs(std::log(6.0L), 2 * std::log(9.0L), 0.5) == doctest::Approx(4.250).epsilon(1e-3));

  long double g1[] = {std::log(2.0L)};
  CHECK(eg_rhs(1, 1, g1, std::log(8.0L), 1) == doctest::Approx(std::pow(16 * e, 3) * std::log(2.0L)));
  CHECK(eg_rhs(1, 1, g1, 1, 0) == 0.0L);
  long double g2[] = {std::log(2.0L), std::log(3.0L)};
  CHECK(eg_rhs(2, 2, g2, e, 1) ==
        doctest::Approx(2 * std::pow(32 * e, 6) * std::log(2.0L) * std::log(3.0L)).epsilon(1e-12));
  CHECK_ERRC(eg_rhs(2, 1, g1, 1, 1), Errc::dimension_mismatch);

  i64 a[] = {2, 3}, b[] = {3, -2};
  CHECK(lw_rhs(a, b, 0, 1) == doctest::Approx(1.0L / 12));
  CHECK(lw_lhs(a, b) == doctest::Approx(1.0L / 9).epsilon(1e-18));
  i64 a1[] = {2}, b1[] = {1};
  CHECK(lw_rhs(a1, b1, 0, 1) == doctest::Approx(0.5L));
  CHECK(lw_lhs(a1, b1) == 1.0L);
  CHECK(lw_lemma_rhs(std::log(6.0L), std::log(9.0L), 1, 0) ==
        doctest::Approx(2 * std::log(6.0L) + std::log(9.0L)));

  i64 a4[] = {2, 4}, b4[] = {2, -1};
  CHECK_ERRC(lw_rhs(a4, b4, 1, 1), Errc::product_is_one);
  CHECK_ERRC(lw_lhs(a4, b4), Errc::product_is_one);
  i64 a6[] = {6, 2, 3}, b6[] = {1, -1, -1};
  CHECK_ERRC(lw_lhs(a6, b6), Errc::product_is_one);
  i64 a0[] = {0}, b0[] = {1};
  CHECK_ERRC(lw_lhs(a0, b0), Errc::bad_params);
}

TEST_CASE("lw lhs agrees with a direct evaluation near 1") {
  for (int i = 0; i < 500; ++i) {
    i64 a[] = {testsupport::uniform(2, 20), testsupport::uniform(2, 20)};
    i64 b[] = {testsupport::uniform(1, 10) * (testsupport::uniform(0, 1) ? 1 : -1),
               testsupport::uniform(1, 10) * (testsupport::uniform(0, 1) ? 1 : -1)};
    long double direct = std::pow((long double)a[0], (long double)b[0]) * std::pow((long double)a[1], (long double)b[1]);
    if (std::fabs(std::log(direct)) < 1e-9L) continue;
    long double got = lw_lhs(a, b);
    CHECK(got == doctest::Approx(std::fabs(direct - 1)).epsilon(1e-9));
  }
}

TEST_CASE("bounds increase in kappa and epsilon") {
  const long double ks[] = {-2, -0.5, 0, 0.5, 1, 3};
  const long double es[] = {0.05, 0.25, 1, 2};
  const long double hstep = 1e-3;
  for (long double rad : {2.0L, 30.0L, 1e4L, 1e9L}) {
    for (long double eps : es)
      for (long double k : ks) {
        CHECK(thm1_rhs(3, rad, params(Variant::thm1, eps, k + hstep)) > thm1_rhs(3, rad, params(Variant::thm1, eps, k)));
        CHECK(thm1_rhs(3, rad, params(Variant::thm1, eps + hstep, k)) > thm1_rhs(3, rad, params(Variant::thm1, eps, k)));
        long double n1 = std::log(rad);
        CHECK(thm1bis_rhs(3, n1, params(Variant::thm1bis, eps, k + hstep)) >
              thm1bis_rhs(3, n1, params(Variant::thm1bis, eps, k)));
        CHECK(thm1bis_rhs(3, n1, params(Variant::thm1bis, eps + hstep, k)) >
              thm1bis_rhs(3, n1, params(Variant::thm1bis, eps, k)));
        // finite differences only where both sides are representable
        auto up = [](long double hi, long double lo) {
          if (lo > 0 && std::isfinite(hi)) CHECK(hi > lo);
        };
        long double c0 = coro_abc_rhs(2, rad, params(Variant::coro_abc, eps, k));
        up(coro_abc_rhs(2, rad, params(Variant::coro_abc, eps, k + hstep)), c0);
        if (k > 0) up(coro_abc_rhs(2, rad, params(Variant::coro_abc, eps + hstep, k)), c0);
        up(stewart_yu_rhs(rad, k + hstep), stewart_yu_rhs(rad, k));
        if (rad <= 1e4L) {
          CHECK(coromain_rhs(n1, 10, eps, k + hstep) > coromain_rhs(n1, 10, eps, k));
          CHECK(coromain_rhs(n1, 10, eps + hstep, k) > coromain_rhs(n1, 10, eps, k));
        }
        CHECK(lw_lemma_rhs(n1, 2, eps, k + hstep) > lw_lemma_rhs(n1, 2, eps, k));
        CHECK(lw_lemma_rhs(n1, 2, eps + hstep, k) > lw_lemma_rhs(n1, 2, eps, k));
      }
  }
}

TEST_CASE("fit_kappa worked values") {
  BoundRecord r;
  r.id = "8/9";
  r.lhs = std::log(9.0L);
  r.h = std::log(9.0L);
  r.n1 = std::log(6.0L);
  FitResult one = fit_kappa(std::vector<BoundRecord>{r}, Variant::thm1bis, 1);
  CHECK(one.kappa_min == doctest::Approx(std::log(std::log(9.0L)) - 2 * std::log(6.0L)));
  CHECK(one.kappa_min == doctest::Approx(-2.796).epsilon(1e-3));
  CHECK(one.argmax_id == "8/9");
  CHECK(one.sample_size == 1);

  FitResult two = fit_kappa(std::vector<BoundRecord>{r, r}, Variant::thm1bis, 1);
  CHECK(two.kappa_min == one.kappa_min);
  CHECK(two.argmax == 0);

  BoundRecord z = r;
  z.lhs = 0;
  BoundRecord n = r;
  n.lhs = -1;
  FitResult vac = fit_kappa(std::vector<BoundRecord>{z, n}, Variant::thm1bis, 1);
  CHECK(vac.kappa_min == -kInf);
  CHECK(vac.skipped == 2);
  CHECK_ERRC(fit_kappa(std::vector<BoundRecord>{}, Variant::thm1bis, 1), Errc::empty_sample);
}

TEST_CASE("fit_kappa inversion is tight at the argmax") {
  std::vector<BoundRecord> recs;
  for (std::size_t i = 0; i < 400; ++i) recs.push_back(random_record(i));
  for (Variant v : kAllVariants) {
    CAPTURE(variant_name(v));
    long double eps = 1;
    FitResult f = fit_kappa(recs, v, eps, 3);
    CHECK(f.sample_size == recs.size());
    REQUIRE(std::isfinite(f.kappa_min));
    const BoundRecord& arg = recs[f.argmax];
    CHECK(rhs(arg, v, eps, f.kappa_min) == doctest::Approx(arg.lhs).epsilon(1e-9));
    bool lower = fits_minimum(v);
    for (const BoundRecord& r : recs) {
      long double b = rhs(r, v, eps, f.kappa_min);
      if (lower)
        CHECK(r.lhs >= b * (1 - 1e-12L));
      else
        CHECK(r.lhs <= b * (1 + 1e-12L) + 1e-12L);
    }
    long double nudged = rhs(arg, v, eps, lower ? f.kappa_min + 1e-6L : f.kappa_min - 1e-6L);
    if (lower)
      CHECK(arg.lhs < nudged);
    else
      CHECK(arg.lhs > nudged);
  }
}

TEST_CASE("fit_kappa is deterministic across job counts") {
  std::vector<BoundRecord> recs;
  for (std::size_t i = 0; i < 1000; ++i) recs.push_back(random_record(i));
  // duplicated maxima resolve to the first index
  recs.push_back(recs[17]);
  recs.push_back(recs[17]);
  for (Variant v : kAllVariants) {
    FitResult a = fit_kappa(recs, v, 0.5, 1);
    for (unsigned jobs : {2u, 5u, 8u, 64u}) {
      FitResult b = fit_kappa(recs, v, 0.5, jobs);
      CHECK(a.kappa_min == b.kappa_min);
      CHECK(a.argmax == b.argmax);
      CHECK(a.skipped == b.skipped);
    }
  }
}

TEST_CASE("crossover trivial shapes") {
  Crossover c = crossover([](long double) { return 1.0L; }, [](long double) { return 2.0L; });
  CHECK(c.r0 == doctest::Approx(kGridMin));
  CHECK_ERRC(crossover([](long double u) { return u; }, [](long double u) { return u; }), Errc::no_crossover_in_range);
  CHECK_ERRC(crossover(Variant::coromain, Variant::stewart_yu, params(Variant::thm1, 1, 1)), Errc::bad_params);
}

TEST_CASE("coro-abc exponent crosses below Stewart-Yu") {
  Crossover c = crossover(Variant::coro_abc, Variant::stewart_yu, params(Variant::coro_abc, 1, 1));
  REQUIRE(std::isfinite(c.r0));
  // 2 log*_3 R / log*_2 R < 1/3 + 3 log log R / log R
  auto holds = [](long double r) {
    long double u = std::log(r);
    long double l2 = ls(u), l3 = ls(l2);
    return 2 * l3 / l2 < 1.0L / 3 + 3 * std::log(u) / u;
  };
  CHECK(holds(c.r0));
  CHECK(holds(10 * c.r0));
  CHECK(holds(100 * c.r0));
  // the grid point before R0 does not qualify
  long double prev = c.r0 / kGridFactor;
  if (prev >= kGridMin) CHECK_FALSE((holds(prev) && holds(10 * prev) && holds(100 * prev)));
}

TEST_CASE("coro-abc over Stewart-Yu ratio eventually decreases in log R") {
  // log of R^(2 log*_3 R / log*_2 R) / (R^(1/3) (log R)^3), as a function of u = log R
  auto f = [](long double u) {
    long double l2 = ls(u), l3 = ls(l2);
    return 2 * u * l3 / l2 - u / 3 - 3 * std::log(u);
  };
  long double prev = f(1e9L);
  for (long double u = 1e10L; u <= 1e300L; u *= 10) {
    long double cur = f(u);
    CHECK(cur < prev);
    prev = cur;
  }
  CHECK(prev < 0);
  // the library shapes agree with the closed form
  for (long double u : {5.0L, 50.0L, 1e5L, 1e40L})
    CHECK(coro_abc_log_exponent(u, 1, 1) - stewart_yu_log_exponent(u, 1) == doctest::Approx(f(u)));
}

TEST_CASE("omega threshold") {
  CHECK(omega_threshold(1000000) == 1);
  const unsigned n = 200000;
  std::vector<unsigned> w(n + 1, 0);
  for (unsigned p = 2; p <= n; ++p)
    if (w[p] == 0)
      for (unsigned m = p; m <= n; m += p) ++w[m];
  for (unsigned m = 2; m <= n; ++m) {
    long double lm = std::log((long double)m);
    if (!(w[m] * std::log(lm) < 2 * lm)) FAIL("omega bound fails at " << m);
  }
}

TEST_CASE("elementary bound and AM-GM") {
  for (unsigned n = 1; n <= 200; ++n) CHECK(elementary_bound_holds(n));
  std::vector<u64> primes;
  for (u64 p = 2; primes.size() < 200; ++p)
    if (exactnum::is_prime(p)) primes.push_back(p);
  for (int t = 0; t < 2000; ++t) {
    std::vector<u64> s;
    for (u64 p : primes)
      if (testsupport::uniform(0, 9) == 0) s.push_back(p);
    if (s.empty()) s.push_back(primes[testsupport::uniform(0, 199)]);
    AmGm m = amgm_majorization(s);
    CHECK(m.log_product <= m.log_mean_power + 1e-15L * std::fabs(m.log_mean_power));
  }
  u64 single[] = {7};
  AmGm one = amgm_majorization(single);
  CHECK(one.log_product == one.log_mean_power);
}

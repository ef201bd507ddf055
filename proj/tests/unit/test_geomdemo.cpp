#include <cmath>
#include <set>
#include <sstream>

#include "test_support.hpp"
#include "trunclab/geomdemo.hpp"

using namespace trunclab;
using namespace trunclab::geomdemo;
using diophfun::DivisorSpec;
using diophfun::P1Target;

namespace {

const Place inf = Place::infinity();

DemoInstance standard() {
  std::istringstream in("n=2\nform=1,0,0\nform=0,1,0\nmap=0:1/1:1\nP=1:2:1\n");
  return DemoInstance::parse(in);
}

DemoInstance three_lines() {
  std::istringstream in("# x0^2 / (x1 x2)\nn=2\nform=1,0,0\nform=0,1,0\nform=0,0,1\nmap=0:2/1:1,2:1\nP=[1:2:3]\n");
  return DemoInstance::parse(in);
}

ProjPoint pt(std::vector<i128> c) { return ProjPoint(std::move(c)); }

}  // namespace

TEST_CASE("eval_map worked values") {
  auto inst = standard();
  CHECK(eval_map(inst, pt({1, 3, 2})) == pt({1, 3}));
  CHECK_ERRC(eval_map(inst, pt({0, 0, 1})), Errc::indeterminacy_locus);
  CHECK(eval_map(inst, pt({0, 1, 1})) == pt({0, 1}));
  CHECK(eval_map(inst, pt({1, 0, 1})) == ProjPoint::infinity_p1());
  auto t = three_lines();
  CHECK(eval_map(t, pt({1, 1, 1})) == pt({1, 1}));
  CHECK(eval_map(t, pt({2, 3, 5})) == pt({4, 15}));
  CHECK(inst.m() == 1);
  CHECK(t.m() == 2);
  CHECK(inst.alpha() == pt({1, 2}));
}

TEST_CASE("Z membership") {
  auto inst = standard();
  CHECK(z_membership(inst, pt({1, 2, 5})));
  CHECK_FALSE(z_membership(inst, pt({1, 3, 2})));
  CHECK(z_membership(inst, pt({0, 1, 1})));
  CHECK(z_membership(inst, pt({3, 6, -7})));
  CHECK_ERRC(pipeline_check(inst, pt({1, 2, 5}), inf, {}), Errc::on_z);
}

TEST_CASE("pipeline worked values at [1:3:2]") {
  auto inst = standard();
  PipelineReport r = pipeline_check(inst, pt({1, 3, 2}), inf, {});
  CHECK(r.fx == pt({1, 3}));
  CHECK(r.d_lhs == doctest::Approx(std::log(3.0L)));
  CHECK(r.d_rhs == doctest::Approx(std::log(3.0L)));
  CHECK(r.d_excess == 0);
  CHECK(r.a_lhs == doctest::Approx(2 * std::log(3.0L)));
  CHECK(r.a_rhs == doctest::Approx(2 * std::log(3.0L)));
  CHECK(r.c_sum == r.c_max);
  // main rhs: log*(2 log 3) exp(2 log 3 / log*(log 3) log*_2(log 3)) = 1 * 9
  CHECK(r.main_rhs == doctest::Approx(9.0L));
  CHECK(r.in_margin);
}

TEST_CASE("pipeline agrees with the general Weil and counting functions") {
  auto inst = three_lines();
  const auto zi = DivisorSpec::parse("p1:[0]+[inf]");
  const auto d = inst.divisor();
  const auto alpha = P1Target::rational(Rational(inst.alpha()[0], inst.alpha()[1]));
  for (Place v : {inf, Place::prime(2), Place::prime(3), Place::prime(5)}) {
    int checked = 0;
    for (int t = 0; t < 400; ++t) {
      std::vector<i128> c;
      for (int i = 0; i < 3; ++i) c.push_back(testsupport::uniform(-60, 60));
      if (c == std::vector<i128>{0, 0, 0}) continue;
      ProjPoint x(c);
      if (z_membership(inst, x)) continue;
      PipelineReport r = pipeline_check(inst, x, v, {0.5, 0.25});
      CHECK(r.a_lhs == doctest::Approx(2 * diophfun::height_projective(r.fx).evaluate()));
      CHECK(r.a_rhs == doctest::Approx(2 * diophfun::height_divisor(d, x).evaluate()));
      CHECK(r.d_lhs == doctest::Approx(diophfun::truncated_counting(zi, r.fx).evaluate()));
      CHECK(r.d_rhs == doctest::Approx(diophfun::truncated_counting(d, x).evaluate()));
      CHECK(r.b_rhs == doctest::Approx(diophfun::weil_point(alpha, r.fx, v).value));
      CHECK(r.b_lhs == doctest::Approx(diophfun::proximity(inst.p(), x, v)));
      long double hd = 3 * diophfun::height_projective(x).evaluate();
      CHECK(r.main_rhs ==
            doctest::Approx(bounds::thm1bis_rhs(hd, r.d_rhs, {0.5, 0.25, v, bounds::Variant::thm1bis})));
      ++checked;
    }
    CHECK(checked > 300);
  }
}

TEST_CASE("sweep enumerates exactly the normalized points off Z") {
  auto inst = standard();
  for (unsigned h : {1u, 2u, 3u, 5u}) {
    std::set<std::vector<i128>> seen;
    std::size_t off_z = 0;
    const long long H = h;
    for (long long a = -H; a <= H; ++a)
      for (long long b = -H; b <= H; ++b)
        for (long long c = -H; c <= H; ++c) {
          if (a == 0 && b == 0 && c == 0) continue;
          long long g = std::gcd(std::gcd(a, b), c);
          long long s = (a != 0 ? a : b != 0 ? b : c) < 0 ? -g : g;
          std::vector<i128> v{a / s, b / s, c / s};
          if (!seen.insert(v).second) continue;
          // off D = {x0 x1 = 0} and off the pullback x1 = 2 x0
          if (v[0] != 0 && v[1] != 0 && v[1] != 2 * v[0]) ++off_z;
        }
    std::vector<ProjPoint> order;
    for_each_point(2, h, [&](const ProjPoint& x) { order.push_back(x); });
    std::size_t in_range = 0;
    for (const auto& v : seen) {
      bool fits = true;
      for (i128 c : v) fits = fits && c >= -H && c <= H;
      in_range += fits;
    }
    CHECK(order.size() == in_range);
    for (std::size_t i = 1; i < order.size(); ++i) {
      auto a = order[i - 1].coords(), b = order[i].coords();
      CHECK(std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end()));
    }
    std::vector<PipelineReport> reports;
    SweepSummary s = sweep(inst, h, inf, {}, [&](const PipelineReport& r) { reports.push_back(r); });
    CHECK(s.reports == off_z);
    CHECK(reports.size() == off_z);
    CHECK(s.reports + s.excluded == order.size());
    for (const auto& r : reports) CHECK_FALSE(z_membership(inst, r.x));
  }
  SweepSummary empty = sweep(inst, 0, inf, {});
  CHECK(empty.reports == 0);
}

TEST_CASE("sweep properties: steps (a), (c), (d)") {
  for (const DemoInstance& inst : {standard(), three_lines()}) {
    const long double bound = step_a_bound(inst);
    const long double spec_bound = (inst.map().numerator_degree() + inst.map().denominator_degree()) * std::log(3.0L);
    CHECK(bound <= spec_bound);
    for (Place v : {inf, Place::prime(2), Place::prime(7)}) {
      SweepSummary s = sweep(inst, 6, v, {}, [&](const PipelineReport& r) {
        CHECK(r.a_slack() <= bound + 1e-12L);
        CHECK(r.d_excess == 0);
        CHECK(r.c_slack() == 0);
      });
      CHECK(s.reports > 0);
      CHECK(s.d.value == 0);
      CHECK(s.c.value == 0);
      CHECK(s.a.value <= bound + 1e-12L);
    }
  }
}

TEST_CASE("fitted kappa holds on the larger sweep") {
  auto inst = standard();
  SweepSummary small = sweep(inst, 10, inf, {});
  REQUIRE(std::isfinite(small.kappa.kappa_min));
  CHECK(small.violations == 0);
  SweepSummary again = sweep(inst, 10, inf, {1, small.kappa.kappa_min});
  CHECK(again.violations == 0);
  // one step below the fitted constant breaks the argmax point
  SweepSummary below = sweep(inst, 10, inf, {1, small.kappa.kappa_min - 1e-6L});
  CHECK(below.violations >= 1);
  REQUIRE(below.first_violation);
}

TEST_CASE("sweep is deterministic across workers") {
  auto inst = three_lines();
  auto run = [&](unsigned jobs) {
    std::ostringstream csv;
    SweepSummary s = sweep(inst, 5, Place::prime(3), {}, [&](const PipelineReport& r) { write_csv_row(csv, r); }, jobs);
    return std::make_pair(csv.str(), s.kappa.kappa_min);
  };
  auto one = run(1);
  CHECK(run(3) == one);
  CHECK(run(8) == one);
}

TEST_CASE("instance validation") {
  auto parse = [](const char* text) {
    std::istringstream in(text);
    return DemoInstance::parse(in);
  };
  CHECK_ERRC(parse("n=2\nform=1,0,0\nmap=0:1/1:1\nP=1:2:1\n"), Errc::bad_params);
  CHECK_ERRC(parse("n=2\nform=1,0,0\nform=2,0,0\nmap=0:1/1:1\nP=1:2:1\n"), Errc::bad_params);
  CHECK_ERRC(parse("n=2\nform=1,0,0\nform=0,1,0\nmap=0:1/1:1\nP=0:2:1\n"), Errc::on_divisor);
  CHECK_ERRC(parse("n=2\nform=1,0,0\nform=0,1,0\nmap=0:2/1:1\nP=1:2:1\n"), Errc::bad_params);
  CHECK_ERRC(parse("n=2\nform=1,0\nform=0,1,0\nmap=0:1/1:1\nP=1:2:1\n"), Errc::dimension_mismatch);
  CHECK_ERRC(parse("n=2\nform=1,0,0\nform=0,1,0\nmap=0:1/1:1\n"), Errc::parse_error);
  CHECK_ERRC(parse("n=2\nform=1,0,0\nform=0,1,0\nmap=0:1/1:1\nP=1:2:1\ncolor=red\n"), Errc::parse_error);
  CHECK_ERRC(parse("n=2\nform=1,a,0\n"), Errc::parse_error);
}

TEST_CASE("csv rows") {
  auto inst = standard();
  std::ostringstream out;
  write_csv_header(out);
  write_csv_row(out, pipeline_check(inst, pt({1, 3, 2}), inf, {}));
  write_csv_row(out, pipeline_check(inst, pt({1, -3, 2}), inf, {}));
  std::string s = out.str();
  CHECK(s.starts_with("x,fx,a_lhs,a_rhs,b_lhs,b_rhs,c_sum,c_max,d_lhs,d_rhs,main_lhs,main_rhs,in_margin\n"));
  CHECK(s.find("\n1:3:2,1/3,2.19722457734,") != std::string::npos);
  CHECK(s.find("\n1:-3:2,-1/3,") != std::string::npos);
}

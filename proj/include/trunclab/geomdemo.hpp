#pragma once

#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "trunclab/bounds.hpp"
#include "trunclab/diophfun.hpp"
#include "trunclab/divclass.hpp"

namespace trunclab::geomdemo {

using diophfun::ProjPoint;
using placeval::Place;

// P^n with the hyperplanes D_i = {forms[i] = 0}, f = prod forms^e as in `map`,
// and a rational point P off D.
class DemoInstance {
 public:
  DemoInstance(unsigned n, std::vector<std::vector<i64>> forms, divclass::MonomialMapSpec map, ProjPoint p);
  // n=<int>, form=<c0,...,cn> (repeated), map=<i>:<e>[,..]/<j>:<e>[,..], P=<coords>
  static DemoInstance parse(std::istream& in);

  unsigned n() const { return n_; }
  const std::vector<std::vector<i64>>& forms() const { return forms_; }
  const divclass::MonomialMapSpec& map() const { return map_; }
  const ProjPoint& p() const { return p_; }
  // Smallest M with M * D >= f^*([0] + [inf]).
  unsigned m() const { return m_; }
  // alpha = f(P), as a point of P^1
  const ProjPoint& alpha() const { return alpha_; }
  const diophfun::DivisorSpec& divisor() const { return divisor_; }

 private:
  unsigned n_;
  std::vector<std::vector<i64>> forms_;
  divclass::MonomialMapSpec map_;
  ProjPoint p_;
  unsigned m_ = 1;
  ProjPoint alpha_;
  diophfun::DivisorSpec divisor_;
};

// f(x) as [num : den]; IndeterminacyLocus when both vanish.
ProjPoint eval_map(const DemoInstance& inst, const ProjPoint& x);

bool z_membership(const DemoInstance& inst, const ProjPoint& x);

struct PipelineParams {
  long double epsilon = 1;
  long double kappa = 0;
};

struct PipelineReport {
  ProjPoint x;
  ProjPoint fx;
  long double a_lhs = 0, a_rhs = 0;  // 2 h(f(x))  vs  M h(O(D), x)
  long double b_lhs = 0, b_rhs = 0;  // lambda_v(P, x)  vs  lambda_v(A, f(x))
  long double c_sum = 0, c_max = 0;  // over the conjugates of alpha
  long double d_lhs = 0, d_rhs = 0;  // N_P1([0] + [inf], f(x))  vs  N_X(D, x)
  long double d_excess = 0;  // primes of the left side missing on the right
  long double main_lhs = 0, main_rhs = 0;
  bool in_margin = false;    // main_lhs <= main_rhs

  long double a_slack() const { return a_lhs - a_rhs; }
  long double b_slack() const { return b_lhs - b_rhs; }
  long double c_slack() const { return c_sum - c_max; }
};

PipelineReport pipeline_check(const DemoInstance& inst, const ProjPoint& x, const Place& v,
                              const PipelineParams& params);

// Constant bounding the step (a) slack on every point off Z.
long double step_a_bound(const DemoInstance& inst);

struct SlackMax {
  long double value = -bounds::kInf;
  std::optional<ProjPoint> at;
};

struct SweepSummary {
  std::size_t reports = 0;
  std::size_t excluded = 0;  // points on Z
  SlackMax a, b, c, d;
  bounds::FitResult kappa;   // main inequality, fitted over the sweep
  std::size_t violations = 0;  // main_lhs > main_rhs at params.kappa
  std::optional<ProjPoint> first_violation;
};

using ReportSink = std::function<void(const PipelineReport&)>;

// Normalized points with coordinates in [-H, H], in lexicographic order.
void for_each_point(unsigned n, unsigned h, const std::function<void(const ProjPoint&)>& fn);

SweepSummary sweep(const DemoInstance& inst, unsigned h, const Place& v, const PipelineParams& params,
                   const ReportSink& sink = {}, unsigned jobs = 1);

void write_csv_header(std::ostream& out);
void write_csv_row(std::ostream& out, const PipelineReport& r);

}  // namespace trunclab::geomdemo

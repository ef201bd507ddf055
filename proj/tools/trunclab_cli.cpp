#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "trunclab/bounds.hpp"
#include "trunclab/divclass.hpp"
#include "trunclab/geomdemo.hpp"
#include "trunclab/scanlab.hpp"

#ifndef TRUNCLAB_CONSTANTS_FILE
#define TRUNCLAB_CONSTANTS_FILE "fitted_constants.txt"
#endif

using namespace trunclab;

namespace {

constexpr int kOk = 0;
constexpr int kViolation = 1;
constexpr int kInputError = 2;

std::string num(long double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12Lg", v);
  return buf;
}

std::string short_num(long double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%Lg", v);
  return buf;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::bad_params, "cannot open " + path);
  return in;
}

// Compares a fitted constant against the locked value, or records it.
int lock(const std::string& path, const std::string& key, long double value, const std::string& argmax, bool bless) {
  auto file = scanlab::ConstantsFile::load(path);
  if (bless) {
    file.set(key, value, argmax);
    file.save(path);
    std::cout << "blessed: " << key << " = " << num(value) << '\n';
    return kOk;
  }
  auto locked = file.get(key);
  if (!locked) {
    std::cout << "locked: none for " << key << '\n';
    return kOk;
  }
  const bool same = std::fabs(locked->value - value) <= 1e-9L * std::max(1.0L, std::fabs(value));
  std::cout << "locked: " << num(locked->value) << (same ? " (match)" : " (MISMATCH)") << '\n';
  return same ? kOk : kViolation;
}

struct ScanOptions {
  std::optional<u64> cmax;
  std::string input;
  long double eps = 1;
  std::optional<long double> kappa;
  std::string variant = "thm1bis";
  std::string alpha;
  std::string place = "inf";
  std::string out;
  unsigned jobs = 1;
  bool bless = false;
  std::string constants = TRUNCLAB_CONSTANTS_FILE;
};

scanlab::ScanParams scan_params(const ScanOptions& o) {
  scanlab::ScanParams p;
  p.variant = bounds::parse_variant(o.variant);
  p.epsilon = o.eps;
  p.kappa = o.kappa.value_or(0);
  if (!o.alpha.empty()) p.alpha = scanlab::parse_target(o.alpha);
  p.place = placeval::Place::parse(o.place);
  p.validate();
  return p;
}

std::string fit_key(const ScanOptions& o, const scanlab::ScanParams& p) {
  std::string key = std::string(bounds::variant_name(p.variant)) + ".eps" + short_num(o.eps);
  if (!o.alpha.empty()) key += ".alpha" + o.alpha;
  if (!p.place.is_archimedean()) key += ".place" + o.place;
  if (o.cmax) return key + ".cmax" + std::to_string(*o.cmax);
  return key + ".input";
}

int run_scan(const ScanOptions& o) {
  auto params = scan_params(o);
  std::ifstream in;
  scanlab::Source source;
  if (o.cmax) {
    source = scanlab::enumerated(*o.cmax);
  } else {
    in = open_input(o.input);
    source = scanlab::ingested(in);
  }
  std::ofstream csv;
  scanlab::RecordSink sink;
  if (!o.out.empty()) {
    csv.open(o.out);
    if (!csv) fail(Errc::bad_params, "cannot write " + o.out);
    scanlab::write_csv_header(csv);
    sink = [&](const scanlab::TripleRecord& r) { scanlab::write_csv_row(csv, r); };
  }
  auto summary = scanlab::scan(source, params, sink, o.jobs);
  scanlab::write_summary(std::cout, summary, params);
  int rc = kOk;
  if (summary.fit && std::isfinite(summary.fit->kappa_min))
    rc = lock(o.constants, fit_key(o, params), summary.fit->kappa_min, summary.fit->argmax_id, o.bless);
  if (summary.identity_failures > 0) rc = kViolation;
  if (o.kappa && summary.violations > 0) rc = kViolation;
  return rc;
}

int run_verify_identity(u64 cmax, unsigned jobs) {
  scanlab::ScanParams params;
  auto summary = scanlab::scan(scanlab::enumerated(cmax), params, {}, jobs);
  std::cout << "triples: " << summary.records << '\n';
  std::cout << "identity_failures: " << summary.identity_failures << '\n';
  for (const auto& e : summary.errors) std::cout << "error: " << e << '\n';
  return summary.identity_failures == 0 && summary.errors.empty() ? kOk : kViolation;
}

int run_fit(const ScanOptions& o) {
  auto params = scan_params(o);
  if (!o.cmax) fail(Errc::bad_params, "fit kappa needs --cmax");
  bounds::FitResult fit;
  const bool sieve = params.variant == bounds::Variant::thm1bis && !params.alpha && params.place.is_archimedean();
  if (sieve) {
    fit = scanlab::fit_thm1bis_sieve(*o.cmax, params.epsilon).fit;
  } else {
    auto summary = scanlab::scan(scanlab::enumerated(*o.cmax), params, {}, o.jobs);
    for (const auto& e : summary.errors) std::cout << "error: " << e << '\n';
    if (!summary.fit) fail(Errc::empty_sample, "no records to fit");
    fit = *summary.fit;
  }
  std::cout << "variant: " << bounds::variant_name(params.variant) << '\n';
  std::cout << "records: " << fit.sample_size << '\n';
  std::cout << "vacuous: " << fit.skipped << '\n';
  std::cout << "fitted_kappa: " << num(fit.kappa_min) << '\n';
  std::cout << "fit_argmax: " << fit.argmax_id << '\n';
  if (!std::isfinite(fit.kappa_min)) return kOk;
  return lock(o.constants, fit_key(o, params), fit.kappa_min, fit.argmax_id, o.bless);
}

struct DemoOptions {
  std::string instance;
  unsigned height = 10;
  std::optional<unsigned> recheck;
  long double eps = 1;
  std::optional<long double> kappa;
  std::string place = "inf";
  std::string out;
  unsigned jobs = 1;
};

void print_sweep(const std::string& tag, const geomdemo::SweepSummary& s) {
  auto slack = [&](const char* name, const geomdemo::SlackMax& m) {
    std::cout << tag << name << ": " << num(m.value);
    if (m.at) std::cout << " at " << m.at->to_string();
    std::cout << '\n';
  };
  std::cout << tag << "points: " << s.reports << '\n';
  std::cout << tag << "excluded: " << s.excluded << '\n';
  slack("slack_a", s.a);
  slack("slack_b", s.b);
  slack("slack_c", s.c);
  slack("slack_d", s.d);
  if (s.reports > 0) {
    std::cout << tag << "fitted_kappa: " << num(s.kappa.kappa_min) << '\n';
    std::cout << tag << "fit_argmax: " << s.kappa.argmax_id << '\n';
  }
  std::cout << tag << "violations: " << s.violations << '\n';
  if (s.first_violation) std::cout << tag << "first_violation: " << s.first_violation->to_string() << '\n';
}

int run_demo(const DemoOptions& o) {
  auto in = open_input(o.instance);
  auto inst = geomdemo::DemoInstance::parse(in);
  auto place = placeval::Place::parse(o.place);
  geomdemo::PipelineParams params{o.eps, o.kappa.value_or(0)};
  std::ofstream csv;
  geomdemo::ReportSink sink;
  if (!o.out.empty()) {
    csv.open(o.out);
    if (!csv) fail(Errc::bad_params, "cannot write " + o.out);
    geomdemo::write_csv_header(csv);
    sink = [&](const geomdemo::PipelineReport& r) { geomdemo::write_csv_row(csv, r); };
  }
  std::cout << "map: " << inst.map().pretty() << '\n';
  std::cout << "M: " << inst.m() << '\n';
  std::cout << "step_a_bound: " << num(geomdemo::step_a_bound(inst)) << '\n';
  auto s = geomdemo::sweep(inst, o.height, place, params, sink, o.jobs);
  print_sweep("", s);
  int rc = kOk;
  if (s.d.value > 0 || s.c.value > 0 || s.a.value > geomdemo::step_a_bound(inst) + 1e-12L) rc = kViolation;
  if (o.kappa && s.violations > 0) rc = kViolation;
  if (o.recheck) {
    if (s.reports == 0) fail(Errc::empty_sample, "nothing fitted to recheck");
    geomdemo::PipelineParams fitted{o.eps, s.kappa.kappa_min};
    auto r = geomdemo::sweep(inst, *o.recheck, place, fitted, {}, o.jobs);
    print_sweep("recheck_", r);
    if (r.violations > 0 || r.d.value > 0 || r.c.value > 0) rc = kViolation;
  }
  return rc;
}

int run_depsolve(const std::string& path) {
  auto in = open_input(path);
  auto inst = divclass::read_classes(in);
  const auto m = unsigned(inst.vectors.size());
  std::cout << "rho: " << inst.rho << '\n';
  std::cout << "classes: " << m << '\n';
  auto rel = divclass::integer_kernel(inst);
  if (!rel) {
    std::cout << "relation: none\n";
    return m > inst.rho ? kViolation : kOk;
  }
  const bool ok = divclass::verify(*rel, inst.vectors);
  std::cout << "relation: " << divclass::to_string(*rel) << '\n';
  std::cout << "verified: " << (ok ? "yes" : "no") << '\n';
  return ok ? kOk : kViolation;
}

int run_crossover(const std::string& a, const std::string& b, long double eps, long double kappa) {
  bounds::BoundParams p{eps, kappa};
  p.validate();
  try {
    auto c = bounds::crossover(bounds::parse_variant(a), bounds::parse_variant(b), p);
    std::cout << "R0: " << num(c.r0) << '\n';
    std::cout << "log_R0: " << num(c.log_r0) << '\n';
    return kOk;
  } catch (const Error& e) {
    if (e.code() != Errc::no_crossover_in_range) throw;
    std::cout << "R0: none (" << e.what() << ")\n";
    return kViolation;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trunclab: truncated counting functions, abc-type bounds and their experiments"};
  app.require_subcommand(1);
  int rc = kOk;

  ScanOptions scan_opts;
  auto* scan = app.add_subcommand("scan", "evaluate bounds over abc triples");
  auto* scan_abc = scan->add_subcommand("abc", "scan triples a + b = c");
  scan->require_subcommand(1);
  auto* cmax_opt = scan_abc->add_option("--cmax", scan_opts.cmax, "enumerate all triples with c <= N");
  auto* input_opt = scan_abc->add_option("--input", scan_opts.input, "read 'a b c' lines from FILE");
  cmax_opt->excludes(input_opt);
  scan_abc->add_option("--eps", scan_opts.eps, "epsilon");
  scan_abc->add_option("--kappa", scan_opts.kappa, "constant to check the bound at");
  scan_abc->add_option("--variant", scan_opts.variant, "thm1|thm1bis|coro-abc|sy|sy-p|coromain|eg|lw|lw-lemma");
  scan_abc->add_option("--alpha", scan_opts.alpha, "target point (inf, p/q, or poly:[..];embed:..)");
  scan_abc->add_option("--place", scan_opts.place, "inf or a prime");
  scan_abc->add_option("--out", scan_opts.out, "CSV output");
  scan_abc->add_option("--jobs", scan_opts.jobs, "worker threads")->check(CLI::Range(1u, 256u));
  scan_abc->add_flag("--bless", scan_opts.bless, "record the fitted constant");
  scan_abc->add_option("--constants", scan_opts.constants, "regression constants file");
  scan_abc->callback([&] {
    if (!scan_opts.cmax && scan_opts.input.empty()) throw CLI::RequiredError("--cmax or --input");
    rc = run_scan(scan_opts);
  });

  u64 verify_cmax = 1000;
  unsigned verify_jobs = 1;
  auto* verify = app.add_subcommand("verify", "exact checks");
  verify->require_subcommand(1);
  auto* identity = verify->add_subcommand("identity", "truncated counting vs radicals on every triple");
  identity->add_option("--cmax", verify_cmax, "largest c")->required();
  identity->add_option("--jobs", verify_jobs, "worker threads")->check(CLI::Range(1u, 256u));
  identity->callback([&] { rc = run_verify_identity(verify_cmax, verify_jobs); });

  ScanOptions fit_opts;
  auto* fit = app.add_subcommand("fit", "fit constants");
  fit->require_subcommand(1);
  auto* kappa = fit->add_subcommand("kappa", "least constant making a bound hold on all triples up to c_max");
  kappa->add_option("--variant", fit_opts.variant, "bound variant");
  kappa->add_option("--cmax", fit_opts.cmax, "largest c")->required();
  kappa->add_option("--eps", fit_opts.eps, "epsilon");
  kappa->add_option("--alpha", fit_opts.alpha, "target point (default 1)");
  kappa->add_option("--place", fit_opts.place, "inf or a prime");
  kappa->add_option("--jobs", fit_opts.jobs, "worker threads")->check(CLI::Range(1u, 256u));
  kappa->add_flag("--bless", fit_opts.bless, "record the fitted constant");
  kappa->add_option("--constants", fit_opts.constants, "regression constants file");
  kappa->callback([&] { rc = run_fit(fit_opts); });

  DemoOptions demo_opts;
  auto* demo = app.add_subcommand("demo", "sweep the monomial-map pipeline on P^n");
  demo->add_option("--instance", demo_opts.instance, "instance file")->required();
  demo->add_option("--height", demo_opts.height, "coordinate bound H");
  demo->add_option("--recheck", demo_opts.recheck, "re-sweep at this height with the fitted constant");
  demo->add_option("--eps", demo_opts.eps, "epsilon");
  demo->add_option("--kappa", demo_opts.kappa, "constant to check the main inequality at");
  demo->add_option("--place", demo_opts.place, "inf or a prime");
  demo->add_option("--out", demo_opts.out, "CSV output");
  demo->add_option("--jobs", demo_opts.jobs, "worker threads")->check(CLI::Range(1u, 256u));
  demo->callback([&] { rc = run_demo(demo_opts); });

  std::string classes;
  auto* dep = app.add_subcommand("depsolve", "integer relation among divisor classes");
  dep->add_option("--classes", classes, "class file")->required();
  dep->callback([&] { rc = run_depsolve(classes); });

  std::string va, vb;
  long double cross_eps = 1, cross_kappa = 1;
  auto* cross = app.add_subcommand("crossover", "least R0 from which bound a stays below bound b");
  cross->add_option("--a", va, "first variant")->required();
  cross->add_option("--b", vb, "second variant")->required();
  cross->add_option("--eps", cross_eps, "epsilon");
  cross->add_option("--kappa", cross_kappa, "constant in the exponents");
  cross->callback([&] { rc = run_crossover(va, vb, cross_eps, cross_kappa); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  }
  return rc;
}

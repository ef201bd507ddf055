#include "trunclab/divclass.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <thread>

#include <gmpxx.h>

#include "trunclab/bigint.hpp"

namespace trunclab::divclass {

namespace {

std::size_t check_lengths(std::span<const ClassVector> vectors) {
  if (vectors.empty()) fail(Errc::bad_params, "integer_kernel needs at least one vector");
  std::size_t rho = vectors[0].size();
  for (const auto& v : vectors)
    if (v.size() != rho) fail(Errc::dimension_mismatch, "class vectors differ in length");
  return rho;
}

// Scales to integers with content 1 and a positive leading entry.
std::vector<mpz_class> normalize(const std::vector<mpq_class>& x) {
  mpz_class l = 1;
  for (const auto& q : x) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), q.get_den_mpz_t());
  std::vector<mpz_class> z;
  mpz_class g = 0;
  for (const auto& q : x) {
    z.push_back(mpz_class(q * l));
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), z.back().get_mpz_t());
  }
  auto lead = std::find_if(z.begin(), z.end(), [](const mpz_class& v) { return v != 0; });
  if (lead != z.end() && *lead < 0) g = -g;
  for (auto& v : z) v /= g;
  return z;
}

}  // namespace

std::optional<Relation> integer_kernel(std::span<const ClassVector> vectors) {
  const std::size_t rho = check_lengths(vectors);
  const std::size_t m = vectors.size();
  // rho x m, column i is vectors[i]
  std::vector<std::vector<mpq_class>> a(rho, std::vector<mpq_class>(m));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t r = 0; r < rho; ++r) a[r][i] = vectors[i][r];

  std::vector<std::size_t> pivots;
  std::size_t row = 0;
  for (std::size_t col = 0; col < m && row < rho; ++col) {
    std::size_t p = row;
    while (p < rho && a[p][col] == 0) ++p;
    if (p == rho) continue;
    std::swap(a[p], a[row]);
    mpq_class inv = 1 / a[row][col];
    for (auto& v : a[row]) v *= inv;
    for (std::size_t r = 0; r < rho; ++r) {
      if (r == row || a[r][col] == 0) continue;
      mpq_class f = a[r][col];
      for (std::size_t c = col; c < m; ++c) a[r][c] -= f * a[row][c];
    }
    pivots.push_back(col);
    ++row;
  }

  std::optional<std::vector<mpz_class>> best;
  std::size_t pi = 0;
  for (std::size_t free = 0; free < m; ++free) {
    if (pi < pivots.size() && pivots[pi] == free) {
      ++pi;
      continue;
    }
    std::vector<mpq_class> x(m, 0);
    x[free] = 1;
    for (std::size_t r = 0; r < pivots.size(); ++r) x[pivots[r]] = -a[r][free];
    auto z = normalize(x);
    if (!best || z < *best) best = std::move(z);
  }
  if (!best) return std::nullopt;

  Relation rel;
  for (const auto& v : *best) {
    auto c = to_i128(v);
    if (!c) fail(Errc::overflow, "relation coefficient exceeds 128 bits");
    rel.coeffs.push_back(*c);
  }
  if (!verify(rel, vectors)) fail(Errc::invalid_relation, "kernel vector failed exact verification");
  return rel;
}

std::optional<Relation> integer_kernel(const ClassInstance& inst) {
  for (const auto& v : inst.vectors)
    if (v.size() != inst.rho) fail(Errc::dimension_mismatch, "class vector length differs from rho");
  return integer_kernel(inst.vectors);
}

bool verify(const Relation& rel, std::span<const ClassVector> vectors) {
  if (rel.coeffs.size() != vectors.size()) return false;
  if (std::all_of(rel.coeffs.begin(), rel.coeffs.end(), [](i128 c) { return c == 0; })) return false;
  const std::size_t rho = vectors.empty() ? 0 : vectors[0].size();
  for (std::size_t r = 0; r < rho; ++r) {
    mpz_class s = 0;
    for (std::size_t i = 0; i < vectors.size(); ++i) s += to_mpz(rel.coeffs[i]) * mpz_class(static_cast<long>(vectors[i][r]));
    if (s != 0) return false;
  }
  return true;
}

bool guarantee_check(unsigned m, unsigned rank_pic0, unsigned rank_num) {
  return u64(m) > u64(rank_pic0) + rank_num;
}

std::vector<std::optional<Relation>> solve_batch(std::span<const ClassInstance> instances, unsigned jobs) {
  std::vector<std::optional<Relation>> out(instances.size());
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(1, instances.size()))));
  auto work = [&](unsigned j) {
    for (std::size_t i = j; i < instances.size(); i += jobs) out[i] = integer_kernel(instances[i]);
  };
  if (jobs == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(work, j);
  }
  return out;
}

unsigned MonomialMapSpec::numerator_degree() const {
  unsigned d = 0;
  for (auto& f : numerator) d += f.exponent;
  return d;
}

unsigned MonomialMapSpec::denominator_degree() const {
  unsigned d = 0;
  for (auto& f : denominator) d += f.exponent;
  return d;
}

std::string MonomialMapSpec::to_string() const {
  auto side = [](const std::vector<MonomialFactor>& fs) {
    std::string s;
    for (auto& f : fs) s += (s.empty() ? "" : ",") + std::to_string(f.index) + ":" + std::to_string(f.exponent);
    return s;
  };
  return side(numerator) + "/" + side(denominator);
}

std::string MonomialMapSpec::pretty() const {
  auto side = [](const std::vector<MonomialFactor>& fs) {
    std::string s;
    for (auto& f : fs) {
      if (!s.empty()) s += "*";
      s += "x" + std::to_string(f.index);
      if (f.exponent != 1) s += "^" + std::to_string(f.exponent);
    }
    return s;
  };
  std::string den = side(denominator);
  if (denominator.size() > 1 || (denominator.size() == 1 && denominator[0].exponent != 1)) den = "(" + den + ")";
  return side(numerator) + "/" + den;
}

MonomialMapSpec MonomialMapSpec::parse(std::string_view text) {
  auto slash = text.find('/');
  if (slash == std::string_view::npos) fail(Errc::parse_error, "map needs numerator/denominator");
  auto side = [](std::string_view s) {
    std::vector<MonomialFactor> out;
    while (!s.empty()) {
      auto comma = s.find(',');
      std::string_view item = s.substr(0, comma);
      auto colon = item.find(':');
      if (colon == std::string_view::npos) fail(Errc::parse_error, "map factor needs index:exponent");
      i128 idx = parse_i128(item.substr(0, colon));
      i128 e = parse_i128(item.substr(colon + 1));
      if (idx < 0 || e <= 0 || e > 1000) fail(Errc::parse_error, "bad map factor '" + std::string(item) + "'");
      out.push_back({static_cast<std::size_t>(idx), static_cast<unsigned>(e)});
      s = comma == std::string_view::npos ? std::string_view{} : s.substr(comma + 1);
    }
    return out;
  };
  MonomialMapSpec m{side(text.substr(0, slash)), side(text.substr(slash + 1))};
  if (m.numerator.empty() || m.denominator.empty()) fail(Errc::parse_error, "map sides must be nonempty");
  return m;
}

MonomialMapSpec relation_to_map(const Relation& rel, std::span<const std::vector<i64>> forms) {
  if (rel.coeffs.size() != forms.size()) fail(Errc::dimension_mismatch, "relation and form counts differ");
  // net exponent per distinct form, keyed by first occurrence
  std::map<std::vector<i64>, std::size_t> first;
  std::vector<i128> net(forms.size(), 0);
  for (std::size_t i = 0; i < forms.size(); ++i) {
    auto [it, fresh] = first.try_emplace(forms[i], i);
    net[it->second] = checked_add(net[it->second], rel.coeffs[i]);
  }
  MonomialMapSpec m;
  for (std::size_t i = 0; i < forms.size(); ++i) {
    if (net[i] == 0) continue;
    if (uabs(net[i]) > 1000) fail(Errc::overflow, "map exponent too large");
    MonomialFactor f{i, static_cast<unsigned>(uabs(net[i]))};
    (net[i] > 0 ? m.numerator : m.denominator).push_back(f);
  }
  if (m.numerator.empty() || m.denominator.empty())
    fail(Errc::one_sided_relation, "relation has no zeros or no poles");
  return m;
}

ClassInstance read_classes(std::istream& in) {
  ClassInstance inst;
  std::string line;
  std::size_t lineno = 0;
  bool have_rho = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    std::istringstream ss(line);
    std::string tok;
    if (!(ss >> tok)) continue;
    auto where = [&] { return "line " + std::to_string(lineno); };
    if (!have_rho) {
      if (tok.rfind("rho=", 0) != 0) fail(Errc::parse_error, where() + ": expected rho=<int>");
      i128 r = parse_i128(std::string_view(tok).substr(4));
      if (r < 0 || r > 100000) fail(Errc::parse_error, where() + ": bad rho");
      inst.rho = static_cast<unsigned>(r);
      have_rho = true;
      continue;
    }
    ClassVector v;
    do {
      i128 x;
      try {
        x = parse_i128(tok);
      } catch (const Error&) {
        fail(Errc::parse_error, where() + ": bad integer '" + tok + "'");
      }
      if (x > INT64_MAX || x < INT64_MIN) fail(Errc::parse_error, where() + ": entry out of range");
      v.push_back(static_cast<i64>(x));
    } while (ss >> tok);
    if (v.size() != inst.rho)
      fail(Errc::dimension_mismatch, where() + ": expected " + std::to_string(inst.rho) + " entries");
    inst.vectors.push_back(std::move(v));
  }
  if (!have_rho) fail(Errc::parse_error, "missing rho=<int> line");
  return inst;
}

std::string to_string(const Relation& rel) {
  std::string s = "(";
  for (std::size_t i = 0; i < rel.coeffs.size(); ++i) s += (i ? "," : "") + trunclab::to_string(rel.coeffs[i]);
  return s + ")";
}

}  // namespace trunclab::divclass

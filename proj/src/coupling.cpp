#include "cpt/coupling.hpp"

#include <sstream>

#include "cpt/error.hpp"

namespace cpt {

std::size_t level_index(int f, int m) {
  if (f == 2 && m >= -2 && m <= 2) return static_cast<std::size_t>(m + 2);
  if (f == 1 && m >= -1 && m <= 1) return static_cast<std::size_t>(m + 6);
  throw Error(ErrorKind::InvalidArgument,
              "no sublevel F=" + std::to_string(f) + " m=" + std::to_string(m));
}

namespace {

Rational lookup(const CouplingRow& row, std::size_t level) {
  Rational total;
  for (const auto& t : row)
    if (t.level == level) total += t.coeff;
  return total;
}

std::string label(const char* manifold, std::size_t i) {
  const auto& s = manifold[0] == 'g' ? kGroundLevels[i] : kExcitedLevels[i];
  std::ostringstream os;
  os << manifold << "(F=" << s.f << ",m=" << s.m << ")";
  return os.str();
}

}  // namespace

Rational CouplingTables::pump_coeff(std::size_t ground, std::size_t excited) const {
  return lookup(pump.at(ground), excited);
}
Rational CouplingTables::excitation_coeff(std::size_t excited, std::size_t ground) const {
  return lookup(excitation.at(excited), ground);
}
Rational CouplingTables::branch_coeff(std::size_t excited, std::size_t ground) const {
  return lookup(branch.at(excited), ground);
}

CouplingTables build_coupling_tables() {
  const auto g = [](int f, int m) { return level_index(f, m); };
  const auto e = [](int f, int m) { return level_index(f, m); };
  CouplingTables t;

  // sigma+ excitation, coefficients of the excited-population expressions.
  t.excitation[e(2, -2)] = {};
  t.excitation[e(2, -1)] = {{g(2, -2), {1, 6}}};
  t.excitation[e(1, -1)] = {{g(2, -2), {1, 2}}};
  t.excitation[e(2, 0)] = {{g(2, -1), {1, 4}}, {g(1, -1), {1, 12}}};
  t.excitation[e(1, 0)] = {{g(2, -1), {1, 4}}, {g(1, -1), {1, 12}}};
  t.excitation[e(2, 1)] = {{g(2, 0), {1, 4}}, {g(1, 0), {1, 4}}};
  t.excitation[e(1, 1)] = {{g(2, 0), {1, 12}}, {g(1, 0), {1, 12}}};
  t.excitation[e(2, 2)] = {{g(2, 1), {1, 6}}, {g(1, 1), {1, 2}}};

  // Out-pumping brackets of the ground-population equations. The second
  // term of the (2,-1), (1,-1) and (2,0) rows carries no extra factor of
  // Gamma; see audit_coupling_tables for the balance this restores.
  t.pump[g(2, -2)] = {{e(2, -1), {1, 3}}, {e(1, -1), 1}};
  t.pump[g(2, -1)] = {{e(2, 0), {1, 2}}, {e(1, 0), {1, 2}}};
  t.pump[g(1, -1)] = {{e(2, 0), {1, 6}}, {e(1, 0), {1, 6}}};
  t.pump[g(2, 0)] = {{e(2, 1), {1, 2}}, {e(1, 1), {1, 6}}};
  t.pump[g(1, 0)] = {{e(2, 1), {1, 2}}, {e(1, 1), {1, 6}}};
  t.pump[g(2, 1)] = {{e(2, 2), {1, 3}}};
  t.pump[g(1, 1)] = {{e(2, 2), 1}};
  t.pump[g(2, 2)] = {};

  // Spontaneous branching, read column-wise from the gamma-feed terms.
  t.branch[e(2, -2)] = {{g(2, -2), {1, 3}}, {g(2, -1), {1, 6}}, {g(1, -1), {1, 2}}};
  t.branch[e(2, -1)] = {{g(2, -2), {1, 6}}, {g(2, -1), {1, 12}}, {g(1, -1), {1, 4}},
                        {g(2, 0), {1, 4}},  {g(1, 0), {1, 4}}};
  t.branch[e(2, 0)] = {{g(2, -1), {1, 4}}, {g(1, -1), {1, 12}}, {g(1, 0), {1, 3}},
                       {g(2, 1), {1, 4}},  {g(1, 1), {1, 12}}};
  t.branch[e(2, 1)] = {{g(2, 0), {1, 4}}, {g(1, 0), {1, 4}}, {g(2, 1), {1, 12}},
                       {g(1, 1), {1, 4}}, {g(2, 2), {1, 6}}};
  t.branch[e(2, 2)] = {{g(2, 1), {1, 6}}, {g(1, 1), {1, 2}}, {g(2, 2), {1, 3}}};
  t.branch[e(1, -1)] = {{g(2, -2), {1, 2}}, {g(2, -1), {1, 4}}, {g(1, -1), {1, 12}},
                        {g(2, 0), {1, 12}}, {g(1, 0), {1, 12}}};
  t.branch[e(1, 0)] = {{g(2, -1), {1, 4}}, {g(1, -1), {1, 12}}, {g(2, 0), {1, 3}},
                       {g(2, 1), {1, 4}},  {g(1, 1), {1, 12}}};
  t.branch[e(1, 1)] = {{g(2, 0), {1, 12}}, {g(1, 0), {1, 12}}, {g(2, 1), {1, 4}},
                       {g(1, 1), {1, 12}}, {g(2, 2), {1, 2}}};
  return t;
}

const CouplingTables& coupling_tables() {
  static const CouplingTables tables = build_coupling_tables();
  return tables;
}

std::vector<std::string> audit_coupling_tables(const CouplingTables& t) {
  std::vector<std::string> issues;
  const Rational one = 1;

  for (std::size_t ex = 0; ex < kLevelCount; ++ex) {
    Rational sum;
    for (const auto& term : t.branch[ex]) sum += term.coeff;
    if (sum != one) {
      std::ostringstream os;
      os << "branch row " << label("e", ex) << " sums to " << sum;
      issues.push_back(os.str());
    }
  }
  for (std::size_t gr = 0; gr < kLevelCount; ++gr) {
    Rational sum;
    for (std::size_t ex = 0; ex < kLevelCount; ++ex) sum += t.branch_coeff(ex, gr);
    if (sum != one) {
      std::ostringstream os;
      os << "branch column " << label("g", gr) << " sums to " << sum;
      issues.push_back(os.str());
    }
  }
  for (std::size_t gr = 0; gr < kLevelCount; ++gr) {
    for (std::size_t ex = 0; ex < kLevelCount; ++ex) {
      const Rational k = t.pump_coeff(gr, ex);
      const Rational a = t.excitation_coeff(ex, gr);
      if (k != Rational(2) * a) {
        std::ostringstream os;
        os << "detailed balance " << label("g", gr) << "->" << label("e", ex)
           << ": pump " << k << " vs 2*excitation " << Rational(2) * a;
        issues.push_back(os.str());
      }
    }
  }
  for (std::size_t ex = 0; ex < kLevelCount; ++ex) {
    const Rational a2 = t.excitation_coeff(ex, kDarkUpper);
    const Rational a1 = t.excitation_coeff(ex, kDarkLower);
    if ((a2 != Rational()) != (a1 != Rational()) || a1 != a2) {
      std::ostringstream os;
      os << "working pair into " << label("e", ex) << " is unbalanced: " << a2
         << " vs " << a1;
      issues.push_back(os.str());
    }
  }
  return issues;
}

}  // namespace cpt

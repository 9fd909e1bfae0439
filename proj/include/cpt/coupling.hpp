#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "cpt/rational.hpp"

namespace cpt {

/// Magnetic sublevel of one hyperfine component.
struct Sublevel {
  int f;
  int m;
  friend constexpr bool operator==(Sublevel, Sublevel) = default;
};

inline constexpr std::size_t kLevelCount = 8;

// Ground: F_g=2, m=-2..2 then F_g=1, m=-1..1.
inline constexpr std::array<Sublevel, kLevelCount> kGroundLevels{{
    {2, -2}, {2, -1}, {2, 0}, {2, 1}, {2, 2}, {1, -1}, {1, 0}, {1, 1}}};

// Excited: F_e=2 ("u"), m=-2..2 then F_e=1 ("d"), m=-1..1.
inline constexpr std::array<Sublevel, kLevelCount> kExcitedLevels{{
    {2, -2}, {2, -1}, {2, 0}, {2, 1}, {2, 2}, {1, -1}, {1, 0}, {1, 1}}};

/// Index of (F, m) in either ordering above. Throws InvalidArgument for
/// sublevels outside F in {1, 2}, |m| <= F.
std::size_t level_index(int f, int m);

inline constexpr std::size_t kDarkUpper = 2;  // (F_g=2, m=0)
inline constexpr std::size_t kDarkLower = 6;  // (F_g=1, m=0)

struct CouplingTerm {
  std::size_t level;
  Rational coeff;
};

using CouplingRow = std::vector<CouplingTerm>;

/// Rational coefficients of the steady-state model.
///
/// Rates are expressed through the Lorentz factor of the excited manifold
/// (l_u for F_e=2, l_d for F_e=1) times V^2:
///   pump[g]        : out-pumping of ground g is sum_e coeff * V^2 l_e
///   excitation[e]  : rho_e = sum_g coeff * (2/gamma) V^2 l_e rho_g
///   branch[e]      : fraction of decay of e that lands in each ground g
/// Excited sublevels coupled to both working sublevels (F_g=1,2, m=0) see
/// the pair through rho_20 + rho_10 - 2 Re rho^21, so their two excitation
/// coefficients coincide.
struct CouplingTables {
  std::array<CouplingRow, kLevelCount> pump;
  std::array<CouplingRow, kLevelCount> excitation;
  std::array<CouplingRow, kLevelCount> branch;

  /// Pump coefficient k(g, e), zero when the pair is not coupled.
  Rational pump_coeff(std::size_t ground, std::size_t excited) const;
  Rational excitation_coeff(std::size_t excited, std::size_t ground) const;
  Rational branch_coeff(std::size_t excited, std::size_t ground) const;
};

CouplingTables build_coupling_tables();

/// Process-wide immutable copy.
const CouplingTables& coupling_tables();

/// Rational-arithmetic audit; returns a human readable line per violation:
/// branch rows and columns summing to 1, k(g,e) == 2 a(e,g), and equal
/// excitation coefficients for the working pair.
std::vector<std::string> audit_coupling_tables(const CouplingTables& tables);

/// True for excited sublevels of the F_e=2 manifold.
constexpr bool is_upper_manifold(std::size_t excited) { return excited < 5; }

}  // namespace cpt

#pragma once

// Independent evaluator of the four-level steady-state equations, written
// term by term with named matrix elements. It shares no code with the
// solver (no coupling tables, no assembly) and is used only by tests.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>

namespace oracle {

struct Inputs {
  double V, Gamma, gamma, Gamma_g, omega_e, Delta, delta;
  bool depolarized;
};

struct Ground {
  double r22_m2, r22_m1, r22_0, r22_p1, r22_p2;
  double r11_m1, r11_0, r11_p1;
  std::complex<double> r21;
};

struct Excited {
  double uu_m2, uu_m1, uu_0, uu_p1, uu_p2;
  double dd_m1, dd_0, dd_p1;
  double total() const { return uu_m2 + uu_m1 + uu_0 + uu_p1 + uu_p2 + dd_m1 + dd_0 + dd_p1; }
};

inline Ground from_array(const std::array<double, 8>& g, std::complex<double> c) {
  return {g[0], g[1], g[2], g[3], g[4], g[5], g[6], g[7], c};
}

inline Excited excited(const Inputs& p, const Ground& g) {
  const double Du = p.Delta * p.Delta + p.Gamma * p.Gamma;
  const double Dd = (p.Delta + p.omega_e) * (p.Delta + p.omega_e) + p.Gamma * p.Gamma;
  const double V2 = p.V * p.V;
  const double Lu = (p.Gamma / (p.gamma / 2)) / Du;
  const double Ld = (p.Gamma / (p.gamma / 2)) / Dd;
  const double bracket = g.r22_0 + g.r11_0 - 2 * g.r21.real();
  Excited e{};
  e.uu_m2 = 0;
  e.uu_m1 = V2 / 6 * Lu * g.r22_m2;
  e.dd_m1 = V2 / 2 * Ld * g.r22_m2;
  e.uu_0 = V2 / 4 * Lu * (g.r22_m1 + g.r11_m1 / 3);
  e.dd_0 = V2 / 4 * Ld * (g.r22_m1 + g.r11_m1 / 3);
  e.uu_p1 = V2 / 4 * Lu * bracket;
  e.dd_p1 = V2 / 12 * Ld * bracket;
  e.uu_p2 = V2 / 2 * Lu * (g.r22_p1 / 3 + g.r11_p1);
  return e;
}

inline Excited mean_substituted(const Excited& e) {
  const double m = e.total() / 8;
  return {m, m, m, m, m, m, m, m};
}

/// Largest |lhs - rhs| over the ground-population equations and both parts
/// of the coherence equation.
inline double max_residual(const Inputs& p, const Ground& g) {
  Excited x = excited(p, g);
  if (p.depolarized) x = mean_substituted(x);
  const double G = p.Gamma, gam = p.gamma, Gg = p.Gamma_g, D = p.Delta;
  const double De = p.Delta + p.omega_e;
  const double Au = p.V * p.V / (D * D + G * G);
  const double Ad = p.V * p.V / (De * De + G * G);
  const double re = g.r21.real(), im = g.r21.imag();

  std::array<double, 10> r{};
  r[0] = Gg * g.r22_m2 -
         (-G * (Au / 3 + Ad) * g.r22_m2 + Gg / 8 +
          gam * (x.uu_m2 / 3 + x.uu_m1 / 6 + x.dd_m1 / 2));
  r[1] = Gg * g.r22_m1 -
         (-0.5 * G * (Au + Ad) * g.r22_m1 + Gg / 8 +
          gam * (x.uu_m2 / 6 + x.uu_m1 / 12 + x.uu_0 / 4 + x.dd_m1 / 4 + x.dd_0 / 4));
  r[5] = Gg * g.r11_m1 -
         (-G / 6 * (Au + Ad) * g.r11_m1 + Gg / 8 +
          gam * (x.uu_m2 / 2 + x.uu_m1 / 4 + x.uu_0 / 12 + x.dd_m1 / 12 + x.dd_0 / 12));
  r[2] = Gg * g.r22_0 -
         (-0.5 * G * (Au + Ad / 3) * g.r22_0 + 0.5 * Au * (D * im + G * re) +
          Ad / 6 * (De * im + G * re) + Gg / 8 +
          gam * (x.uu_m1 / 4 + x.uu_p1 / 4 + x.dd_m1 / 12 + x.dd_0 / 3 + x.dd_p1 / 12));
  r[6] = Gg * g.r11_0 -
         (-0.5 * G * (Au + Ad / 3) * g.r11_0 - 0.5 * Au * (D * im - G * re) -
          Ad / 6 * (De * im - G * re) + Gg / 8 +
          gam * (x.uu_m1 / 4 + x.uu_0 / 3 + x.uu_p1 / 4 + x.dd_m1 / 12 + x.dd_p1 / 12));
  r[3] = Gg * g.r22_p1 -
         (-G / 3 * Au * g.r22_p1 + Gg / 8 +
          gam * (x.uu_p2 / 6 + x.uu_p1 / 12 + x.uu_0 / 4 + x.dd_p1 / 4 + x.dd_0 / 4));
  r[7] = Gg * g.r11_p1 -
         (-G * Au * g.r11_p1 + Gg / 8 +
          gam * (x.uu_p2 / 2 + x.uu_p1 / 4 + x.uu_0 / 12 + x.dd_p1 / 12 + x.dd_0 / 12));
  r[4] = Gg * g.r22_p2 - (Gg / 8 + gam * (x.uu_p2 / 3 + x.uu_p1 / 6 + x.dd_p1 / 2));

  const std::complex<double> i(0, 1);
  const std::complex<double> lhs =
      (p.delta + i * Gg + i / 2.0 * G * (Au + Ad / 3)) * g.r21;
  const std::complex<double> rhs = i / 4.0 * G * (Au + Ad / 3) * (g.r22_0 + g.r11_0) +
                                   0.25 * (D * Au + De * Ad / 3) * (g.r22_0 - g.r11_0);
  r[8] = (lhs - rhs).real();
  r[9] = (lhs - rhs).imag();

  double worst = 0;
  for (double v : r) worst = std::max(worst, std::abs(v));
  return worst;
}

}  // namespace oracle

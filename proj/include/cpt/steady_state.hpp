#pragma once

#include <array>
#include <complex>
#include <cstddef>

#include "cpt/coupling.hpp"
#include "cpt/dense_solve.hpp"

namespace cpt {

enum class Depolarization { None, Complete };

/// Model-validity indicators. Reported alongside a solution, never enforced.
struct ValidityFlags {
  double natural_to_optical = 0.0;  // gamma_nat / gamma_opt, want << 1
  double saturation = 0.0;          // rabi^2 / gamma_opt^2, want << 1
  bool natural_width_small = true;
  bool low_saturation = true;
};

/// Physical inputs of the four-level sigma+ model, angular units (rad/s).
struct ModelParams {
  double rabi = 0.0;         // V
  double gamma_opt = 0.0;    // optical-coherence relaxation Gamma
  double gamma_nat = 0.0;    // excited-state natural width gamma
  double gamma_g = 0.0;      // ground-state relaxation Gamma_g
  double omega_e = 0.0;      // excited hyperfine splitting
  double delta_opt = 0.0;    // optical detuning from F_e=2
  double delta_raman = 0.0;  // two-photon detuning
  Depolarization depolarization = Depolarization::None;

  /// Throws InvalidArgument for non-finite or out-of-domain values, and
  /// SingularSystem for gamma_g == 0.
  void validate() const;
  ValidityFlags validity() const;

  ModelParams with_raman(double delta) const {
    ModelParams p = *this;
    p.delta_raman = delta;
    return p;
  }
  ModelParams with_mode(Depolarization mode) const {
    ModelParams p = *this;
    p.depolarization = mode;
    return p;
  }
};

/// Lorentzian weights of the two excited manifolds.
struct LorentzFactors {
  double lu = 0.0;  // Gamma / (Delta^2 + Gamma^2)
  double ld = 0.0;  // Gamma / ((Delta + omega_e)^2 + Gamma^2)
  double du = 0.0;  // Delta V^2 / (Delta^2 + Gamma^2)
  double dd = 0.0;  // (Delta + omega_e) V^2 / ((Delta + omega_e)^2 + Gamma^2)

  static LorentzFactors from(const ModelParams& p);

  /// V^2 l_e for the manifold of the given excited sublevel.
  double pump_rate(std::size_t excited, double rabi) const {
    return rabi * rabi * (is_upper_manifold(excited) ? lu : ld);
  }
  double shift_rate(std::size_t excited) const {
    return is_upper_manifold(excited) ? du : dd;
  }
};

/// Dimensionless pumping strength s = V^2 l_u / Gamma_g.
double pumping_strength(const ModelParams& p);

/// Rabi frequency giving the requested pumping strength with all other
/// parameters of `p` held fixed.
double rabi_for_pumping_strength(const ModelParams& p, double strength);

struct GroundPopulations {
  std::array<double, kLevelCount> values{};
  double operator()(int f, int m) const { return values[level_index(f, m)]; }
  double sum() const;
};

struct ExcitedPopulations {
  std::array<double, kLevelCount> values{};
  double operator()(int f, int m) const { return values[level_index(f, m)]; }
  double sum() const;
};

/// rho^21_00, the hyperfine coherence between the working sublevels.
using HyperfineCoherence = std::complex<double>;

struct SteadyStateSolution {
  GroundPopulations ground;
  HyperfineCoherence coherence;
  ExcitedPopulations excited_bare;
  ExcitedPopulations excited_effective;
  double rho_ee = 0.0;
  double residual_norm = 0.0;
  ValidityFlags validity;
};

/// Unknowns: the 8 ground populations in GroundPopulations order, then
/// Re rho^21_00, Im rho^21_00.
inline constexpr std::size_t kUnknowns = 10;
inline constexpr std::size_t kReCoherence = 8;
inline constexpr std::size_t kImCoherence = 9;

struct LinearSystem {
  Matrix<kUnknowns> matrix{};
  Vector<kUnknowns> rhs{};
};

LinearSystem assemble_linear_system(const ModelParams& params);

SteadyStateSolution solve_steady_state(const ModelParams& params);

ExcitedPopulations excited_from_ground(const GroundPopulations& ground,
                                       HyperfineCoherence coherence,
                                       const ModelParams& params);

/// Uniform redistribution over all eight excited sublevels.
ExcitedPopulations depolarize(const ExcitedPopulations& excited);

/// Residuals (lhs - rhs) of the eight ground-population balances followed
/// by the real and imaginary parts of the coherence equation.
Vector<kUnknowns> equation_residuals(const ModelParams& params,
                                     const GroundPopulations& ground,
                                     HyperfineCoherence coherence);

}  // namespace cpt

#include "cpt/steady_state.hpp"

#include <cmath>
#include <string>

#include "cpt/error.hpp"

namespace cpt {

namespace {

// Pairwise sum of eight entries; the mean substitution reproduces the
// total bit-for-bit under this ordering.
double pairwise_sum(const std::array<double, kLevelCount>& v) {
  return ((v[0] + v[1]) + (v[2] + v[3])) + ((v[4] + v[5]) + (v[6] + v[7]));
}

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorKind::InvalidArgument, what);
}

struct Rates {
  std::array<double, kLevelCount> pump{};   // V^2 l_e per excited sublevel
  std::array<double, kLevelCount> shift{};  // Delta_e V^2 / D_e
};

Rates rates_for(const ModelParams& p) {
  const LorentzFactors lf = LorentzFactors::from(p);
  Rates r;
  for (std::size_t e = 0; e < kLevelCount; ++e) {
    r.pump[e] = lf.pump_rate(e, p.rabi);
    r.shift[e] = lf.shift_rate(e);
  }
  return r;
}

double pump_out(const CouplingTables& t, const Rates& r, std::size_t g) {
  double total = 0.0;
  for (const auto& term : t.pump[g]) total += term.coeff.to_double() * r.pump[term.level];
  return total;
}

double shift_of(const CouplingTables& t, const Rates& r, std::size_t g) {
  double total = 0.0;
  for (const auto& term : t.pump[g]) total += term.coeff.to_double() * r.shift[term.level];
  return total;
}

bool couples_working_pair(const CouplingTables& t, std::size_t e) {
  return t.excitation_coeff(e, kDarkUpper) != Rational() &&
         t.excitation_coeff(e, kDarkLower) != Rational();
}

// gamma * rho_e as a linear functional of the unknowns.
std::array<Vector<kUnknowns>, kLevelCount> feed_functionals(const CouplingTables& t,
                                                           const Rates& r) {
  std::array<Vector<kUnknowns>, kLevelCount> f{};
  for (std::size_t e = 0; e < kLevelCount; ++e) {
    for (const auto& term : t.excitation[e])
      f[e][term.level] += 2.0 * term.coeff.to_double() * r.pump[e];
    if (couples_working_pair(t, e))
      f[e][kReCoherence] -= 2.0 * 2.0 * t.excitation_coeff(e, kDarkUpper).to_double() * r.pump[e];
  }
  return f;
}

// Coherence relaxation by optical pumping, and the dispersive coupling of
// the population imbalance, both averaged over the working pair.
struct CoherenceRates {
  double pump;
  double shift;
};

CoherenceRates coherence_rates(const CouplingTables& t, const Rates& r) {
  return {0.5 * (pump_out(t, r, kDarkUpper) + pump_out(t, r, kDarkLower)),
          0.5 * (shift_of(t, r, kDarkUpper) + shift_of(t, r, kDarkLower))};
}

}  // namespace

void ModelParams::validate() const {
  require(std::isfinite(rabi) && std::isfinite(gamma_opt) && std::isfinite(gamma_nat) &&
              std::isfinite(gamma_g) && std::isfinite(omega_e) && std::isfinite(delta_opt) &&
              std::isfinite(delta_raman),
          "model parameters must be finite");
  require(rabi >= 0.0, "rabi must be >= 0");
  require(gamma_opt > 0.0, "gamma_opt must be > 0");
  require(gamma_nat > 0.0, "gamma_nat must be > 0");
  require(omega_e > 0.0, "omega_e must be > 0");
  require(gamma_g >= 0.0, "gamma_g must be > 0");
  if (gamma_g == 0.0)
    throw Error(ErrorKind::SingularSystem, "gamma_g = 0 leaves the ground system singular");
}

ValidityFlags ModelParams::validity() const {
  ValidityFlags v;
  v.natural_to_optical = gamma_nat / gamma_opt;
  v.saturation = (rabi * rabi) / (gamma_opt * gamma_opt);
  v.natural_width_small = v.natural_to_optical < 0.1;
  v.low_saturation = v.saturation < 0.1;
  return v;
}

LorentzFactors LorentzFactors::from(const ModelParams& p) {
  const double g2 = p.gamma_opt * p.gamma_opt;
  const double det_d = p.delta_opt + p.omega_e;
  const double den_u = p.delta_opt * p.delta_opt + g2;
  const double den_d = det_d * det_d + g2;
  const double v2 = p.rabi * p.rabi;
  return {p.gamma_opt / den_u, p.gamma_opt / den_d, p.delta_opt * v2 / den_u,
          det_d * v2 / den_d};
}

double pumping_strength(const ModelParams& p) {
  return p.rabi * p.rabi * LorentzFactors::from(p).lu / p.gamma_g;
}

double rabi_for_pumping_strength(const ModelParams& p, double strength) {
  if (!(strength >= 0.0) || !std::isfinite(strength))
    throw Error(ErrorKind::InvalidArgument, "pumping strength must be finite and >= 0");
  return std::sqrt(strength * p.gamma_g / LorentzFactors::from(p).lu);
}

double GroundPopulations::sum() const { return pairwise_sum(values); }
double ExcitedPopulations::sum() const { return pairwise_sum(values); }

LinearSystem assemble_linear_system(const ModelParams& params) {
  const CouplingTables& t = coupling_tables();
  const Rates r = rates_for(params);
  const auto feed = feed_functionals(t, r);
  LinearSystem sys;
  auto& a = sys.matrix;

  for (std::size_t g = 0; g < kLevelCount; ++g) {
    a[g][g] += params.gamma_g + pump_out(t, r, g);
    sys.rhs[g] = params.gamma_g / 8.0;

    if (params.depolarization == Depolarization::None) {
      for (std::size_t e = 0; e < kLevelCount; ++e) {
        const double b = t.branch_coeff(e, g).to_double();
        if (b == 0.0) continue;
        for (std::size_t j = 0; j < kUnknowns; ++j) a[g][j] -= b * feed[e][j];
      }
    } else {
      for (std::size_t e = 0; e < kLevelCount; ++e)
        for (std::size_t j = 0; j < kUnknowns; ++j) a[g][j] -= feed[e][j] / 8.0;
    }
  }

  // Population transfer through the coherence (working sublevels only).
  a[kDarkUpper][kReCoherence] -= pump_out(t, r, kDarkUpper);
  a[kDarkUpper][kImCoherence] -= shift_of(t, r, kDarkUpper);
  a[kDarkLower][kReCoherence] -= pump_out(t, r, kDarkLower);
  a[kDarkLower][kImCoherence] += shift_of(t, r, kDarkLower);

  // (delta + i Gamma_g + i R) c = (i/2) R (rho20 + rho10) + (1/2) S (rho20 - rho10)
  const CoherenceRates cr = coherence_rates(t, r);
  const double decay = params.gamma_g + cr.pump;
  a[kReCoherence][kReCoherence] = params.delta_raman;
  a[kReCoherence][kImCoherence] = -decay;
  a[kReCoherence][kDarkUpper] = -0.5 * cr.shift;
  a[kReCoherence][kDarkLower] = 0.5 * cr.shift;
  a[kImCoherence][kImCoherence] = params.delta_raman;
  a[kImCoherence][kReCoherence] = decay;
  a[kImCoherence][kDarkUpper] = -0.5 * cr.pump;
  a[kImCoherence][kDarkLower] = -0.5 * cr.pump;
  return sys;
}

ExcitedPopulations excited_from_ground(const GroundPopulations& ground,
                                       HyperfineCoherence coherence,
                                       const ModelParams& params) {
  const CouplingTables& t = coupling_tables();
  const Rates r = rates_for(params);
  ExcitedPopulations out;
  for (std::size_t e = 0; e < kLevelCount; ++e) {
    double source = 0.0;
    for (const auto& term : t.excitation[e])
      source += term.coeff.to_double() * ground.values[term.level];
    if (couples_working_pair(t, e))
      source -= 2.0 * t.excitation_coeff(e, kDarkUpper).to_double() * coherence.real();
    out.values[e] = r.pump[e] * source / (params.gamma_nat / 2.0);
  }
  return out;
}

ExcitedPopulations depolarize(const ExcitedPopulations& excited) {
  const double mean = excited.sum() / 8.0;
  ExcitedPopulations out;
  out.values.fill(mean);
  return out;
}

Vector<kUnknowns> equation_residuals(const ModelParams& params,
                                     const GroundPopulations& ground,
                                     HyperfineCoherence coherence) {
  const CouplingTables& t = coupling_tables();
  const Rates r = rates_for(params);
  const ExcitedPopulations bare = excited_from_ground(ground, coherence, params);
  const ExcitedPopulations eff =
      params.depolarization == Depolarization::Complete ? depolarize(bare) : bare;

  Vector<kUnknowns> res{};
  for (std::size_t g = 0; g < kLevelCount; ++g) {
    double spontaneous = 0.0;
    for (std::size_t e = 0; e < kLevelCount; ++e)
      spontaneous += t.branch_coeff(e, g).to_double() * eff.values[e];
    double rhs = -pump_out(t, r, g) * ground.values[g] + params.gamma_g / 8.0 +
                 params.gamma_nat * spontaneous;
    if (g == kDarkUpper)
      rhs += shift_of(t, r, g) * coherence.imag() + pump_out(t, r, g) * coherence.real();
    if (g == kDarkLower)
      rhs -= shift_of(t, r, g) * coherence.imag() - pump_out(t, r, g) * coherence.real();
    res[g] = params.gamma_g * ground.values[g] - rhs;
  }

  const CoherenceRates cr = coherence_rates(t, r);
  const std::complex<double> i(0.0, 1.0);
  const double g20 = ground.values[kDarkUpper];
  const double g10 = ground.values[kDarkLower];
  const std::complex<double> lhs =
      (params.delta_raman + i * params.gamma_g + i * cr.pump) * coherence;
  const std::complex<double> rhs = 0.5 * i * cr.pump * (g20 + g10) + 0.5 * cr.shift * (g20 - g10);
  res[kReCoherence] = (lhs - rhs).real();
  res[kImCoherence] = (lhs - rhs).imag();
  return res;
}

SteadyStateSolution solve_steady_state(const ModelParams& params) {
  params.validate();
  const LinearSystem sys = assemble_linear_system(params);
  const Vector<kUnknowns> x = solve_dense(sys.matrix, sys.rhs);

  SteadyStateSolution sol;
  for (std::size_t g = 0; g < kLevelCount; ++g) sol.ground.values[g] = x[g];
  sol.coherence = {x[kReCoherence], x[kImCoherence]};

  for (double v : sol.ground.values) {
    if (!(v >= -1e-12 && v <= 1.0 + 1e-12))
      throw Error(ErrorKind::InvariantViolation,
                  "ground population " + std::to_string(v) + " outside [0, 1]");
  }

  sol.excited_bare = excited_from_ground(sol.ground, sol.coherence, params);
  sol.excited_effective = params.depolarization == Depolarization::Complete
                              ? depolarize(sol.excited_bare)
                              : sol.excited_bare;
  sol.rho_ee = sol.excited_bare.sum();

  double worst = 0.0;
  for (double v : equation_residuals(params, sol.ground, sol.coherence))
    worst = std::max(worst, std::abs(v));
  sol.residual_norm = worst;
  if (!(worst < 1e-10 * std::max(1.0, params.gamma_g)))
    throw Error(ErrorKind::InvariantViolation,
                "steady-state residual " + std::to_string(worst) + " above tolerance");
  sol.validity = params.validity();
  return sol;
}

}  // namespace cpt

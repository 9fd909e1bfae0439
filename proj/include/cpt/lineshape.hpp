#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "cpt/steady_state.hpp"

namespace cpt {

enum class Spacing { Linear, Adaptive };

/// Raman-detuning grid, angular units.
struct SweepSpec {
  double delta_min = 0.0;
  double delta_max = 0.0;
  std::size_t n_points = 0;
  Spacing spacing = Spacing::Linear;

  void validate() const;
};

struct LineshapeSample {
  double delta_raman;  // rad/s
  double rho_ee;
};

/// rho_ee(delta) sampled on a strictly increasing grid. `baseline` holds the
/// far-detuned level when it was computed; otherwise the mean of the two
/// edge samples stands in for it.
struct Lineshape {
  std::vector<LineshapeSample> samples;
  ModelParams params;
  std::optional<double> baseline;

  double reference_level() const;
};

struct ContrastResult {
  double baseline = 0.0;
  double amplitude = 0.0;
  double physical_contrast = 0.0;
};

struct ResonanceMetrics {
  double baseline = 0.0;
  double amplitude = 0.0;
  double physical_contrast = 0.0;
  double fwhm_hz = 0.0;
  double center_hz = 0.0;
  double asymmetry = 0.0;
  double qfactor = 0.0;  // per Hz
};

/// Total excited population at one Raman detuning.
double rho_ee_at(const ModelParams& params, double delta_raman);

/// Gamma_g + (pump rate of the working pair); half width of the dip in the
/// weak-saturation picture. Used to size sweeps and search brackets.
double estimated_half_width(const ModelParams& params);

/// Far-detuned rho_ee: mean over delta = +-K W, W = max(Gamma_g, V^2 l_u),
/// with K doubled from 1e3 until the level settles to 1e-6 relative.
double asymptotic_baseline(const ModelParams& params);

ContrastResult physical_contrast(const ModelParams& params);

/// Symmetric grid of +-`span_widths` estimated half widths.
SweepSpec default_sweep(const ModelParams& params, std::size_t n_points,
                        Spacing spacing = Spacing::Linear, double span_widths = 20.0);

Lineshape sweep(const ModelParams& params, const SweepSpec& spec);

/// Full width at half depth in Hz, by linear interpolation between samples.
double fwhm(const Lineshape& shape);

/// Location of the dip minimum (rad/s), parabolic refinement around the
/// lowest sample.
double resonance_center(const Lineshape& shape);

/// Normalized antisymmetric L2 fraction over the FWHM window; 0 for an
/// even dip.
double asymmetry(const Lineshape& shape);

/// max_x |rho(c+x) - rho(c-x)| / amplitude over the mirrored sweep range.
double symmetry_defect(const Lineshape& shape);

ResonanceMetrics lineshape_metrics(const Lineshape& shape);

/// Metrics of the model resonance: contrast from the asymptotic procedure,
/// width, center and asymmetry from a sweep.
ResonanceMetrics resonance_metrics(const ModelParams& params, const SweepSpec& spec);

/// FWHM (rad/s) of the model resonance located by root finding on the
/// steady-state solution itself rather than on a sampled grid.
double model_fwhm(const ModelParams& params);

/// Rabi frequency at which the FWHM exceeds its weak-probe value
/// (V^2 l_u = 1e-3 Gamma_g) by `multiple` times that value.
double calibrate_power_broadening(const ModelParams& params, double multiple);

double qfactor(const ResonanceMetrics& metrics);

}  // namespace cpt

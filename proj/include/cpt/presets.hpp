#pragma once

#include "cpt/steady_state.hpp"

namespace cpt {

// Optical parameters of the reference population-distribution calculation
// (Hz, divided by 2pi): Gamma = 1 GHz, omega_e = 817 MHz, Delta = -30 MHz,
// delta = 0. gamma and Gamma_g are not fixed there; ground populations do
// not depend on gamma and scale out with Gamma_g.
inline constexpr double kFig1GammaOptHz = 1e9;
inline constexpr double kFig1OmegaEHz = 817e6;
inline constexpr double kFig1DeltaOptHz = -30e6;
inline constexpr double kRb87NaturalWidthHz = 5.746e6;  // D1 line
inline constexpr double kDefaultGroundRelaxationHz = 1e3;
inline constexpr double kFig1BroadeningMultiple = 3.0;

/// Reference optical parameters with rabi = 0.
ModelParams fig1_optical_params(Depolarization mode = Depolarization::None);

/// Reference parameters with V calibrated (in the undepolarized model) to
/// the requested power-broadening multiple.
ModelParams fig1_preset(Depolarization mode, double multiple = kFig1BroadeningMultiple);

}  // namespace cpt

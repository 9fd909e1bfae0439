#pragma once

#include <numbers>

namespace cpt {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// All rates and detunings are carried internally as angular frequencies
// (rad/s). Every external surface speaks ordinary frequency (Hz).
constexpr double hz_to_angular(double hz) { return hz * kTwoPi; }
constexpr double angular_to_hz(double omega) { return omega / kTwoPi; }

}  // namespace cpt

#include "cpt/presets.hpp"

#include "cpt/lineshape.hpp"
#include "cpt/units.hpp"

namespace cpt {

ModelParams fig1_optical_params(Depolarization mode) {
  ModelParams p;
  p.gamma_opt = hz_to_angular(kFig1GammaOptHz);
  p.gamma_nat = hz_to_angular(kRb87NaturalWidthHz);
  p.gamma_g = hz_to_angular(kDefaultGroundRelaxationHz);
  p.omega_e = hz_to_angular(kFig1OmegaEHz);
  p.delta_opt = hz_to_angular(kFig1DeltaOptHz);
  p.delta_raman = 0.0;
  p.depolarization = mode;
  return p;
}

ModelParams fig1_preset(Depolarization mode, double multiple) {
  ModelParams p = fig1_optical_params(Depolarization::None);
  p.rabi = calibrate_power_broadening(p, multiple);
  p.depolarization = mode;
  return p;
}

}  // namespace cpt

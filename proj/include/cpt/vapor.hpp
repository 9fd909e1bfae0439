#pragma once

#include <istream>
#include <string>
#include <string_view>

#include "cpt/rational.hpp"

namespace cpt {

/// Nuclear spin I stored as the integer 2I, restricted to 1/2 .. 9/2.
class NuclearSpin {
 public:
  /// Throws InvalidSpin unless 2I is an integer in [1, 9].
  static NuclearSpin from_twice(int twice_i);
  static NuclearSpin from_double(double i);
  /// Accepts "3/2", "1.5" or "1".
  static NuclearSpin parse(std::string_view text);

  int twice() const { return twice_; }
  double value() const { return twice_ / 2.0; }
  Rational exact() const { return {twice_, 2}; }

 private:
  explicit NuclearSpin(int twice_i) : twice_(twice_i) {}
  int twice_;
};

/// log10(P/torr) = a + b/T + c T + d log10 T
struct VaporPressureCurve {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
  double log10_torr(double temperature_k) const;
};

/// Constants of one alkali species, normally read from a key = value file.
struct VaporData {
  int format_version = 0;
  VaporPressureCurve solid;
  VaporPressureCurve liquid;
  double melting_point_k = 0.0;
  double valid_min_k = 0.0;
  double valid_max_k = 0.0;
  double atomic_mass_kg = 0.0;
  std::string nuclear_spin = "3/2";
  double sigma_se_cm2 = 0.0;

  /// Throws ParseError (with line number) for malformed or missing keys.
  static VaporData parse(std::istream& in, const std::string& source = "<stream>");
  static VaporData load(const std::string& path);
};

/// Bundled 87Rb constants.
const VaporData& rb87_vapor_data();

struct VaporParams {
  double temperature_k = 0.0;
  NuclearSpin nuclear_spin = NuclearSpin::from_twice(3);
  double atomic_mass_kg = 0.0;
  double sigma_se_cm2 = 0.0;

  /// 87Rb defaults at the given temperature.
  static VaporParams rb87(double temperature_k);
};

struct SpinExchangeResult {
  double n_cm3 = 0.0;
  double v_r_cm_s = 0.0;
  double gamma_se = 0.0;  // rad/s
  double width_hz = 0.0;  // gamma_se / pi
};

/// (6I + 1) / (8I + 4), exact.
Rational nuclear_spin_prefactor_exact(NuclearSpin spin);
double nuclear_spin_prefactor(NuclearSpin spin);

/// sqrt(16 k_B T / (pi m)) in cm/s; mean relative speed of two identical
/// atoms.
double mean_relative_velocity(double temperature_k, double mass_kg);

/// Saturated number density in cm^-3 (solid curve below the melting point,
/// liquid above). OutOfRange outside [valid_min_K, valid_max_K].
double alkali_number_density(double temperature_k, const VaporData& data = rb87_vapor_data());

SpinExchangeResult spin_exchange(const VaporParams& params,
                                 const VaporData& data = rb87_vapor_data());

inline constexpr double kBoltzmann = 1.380649e-23;  // J/K, exact
inline constexpr double kPascalPerTorr = 101325.0 / 760.0;
inline constexpr double kZeroCelsius = 273.15;

}  // namespace cpt

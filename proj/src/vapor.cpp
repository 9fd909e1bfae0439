#include "cpt/vapor.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "cpt/error.hpp"
#include "vapor_data.hpp"

namespace cpt {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_double(std::string_view text, double& out) {
  text = trim(text);
  if (text.empty()) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(out);
}

}  // namespace

NuclearSpin NuclearSpin::from_twice(int twice_i) {
  if (twice_i < 1 || twice_i > 9)
    throw Error(ErrorKind::InvalidSpin, "nuclear spin must lie in 1/2 .. 9/2");
  return NuclearSpin(twice_i);
}

NuclearSpin NuclearSpin::from_double(double i) {
  const double twice = 2.0 * i;
  const double rounded = std::round(twice);
  if (!std::isfinite(i) || std::abs(twice - rounded) > 1e-12)
    throw Error(ErrorKind::InvalidSpin, "nuclear spin must be a half-integer");
  return from_twice(static_cast<int>(rounded));
}

NuclearSpin NuclearSpin::parse(std::string_view text) {
  text = trim(text);
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    double num = 0.0, den = 0.0;
    if (!parse_double(text.substr(0, slash), num) || !parse_double(text.substr(slash + 1), den) ||
        den == 0.0)
      throw Error(ErrorKind::InvalidSpin, "cannot read nuclear spin '" + std::string(text) + "'");
    return from_double(num / den);
  }
  double v = 0.0;
  if (!parse_double(text, v))
    throw Error(ErrorKind::InvalidSpin, "cannot read nuclear spin '" + std::string(text) + "'");
  return from_double(v);
}

double VaporPressureCurve::log10_torr(double t) const {
  return a + b / t + c * t + d * std::log10(t);
}

VaporData VaporData::parse(std::istream& in, const std::string& source) {
  std::map<std::string, std::pair<std::string, int>> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view v = trim(line);
    if (v.empty() || v.front() == '#') continue;
    const auto eq = v.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorKind::ParseError,
                  source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    kv[std::string(trim(v.substr(0, eq)))] = {std::string(trim(v.substr(eq + 1))), lineno};
  }

  const auto number = [&](const std::string& key) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw Error(ErrorKind::ParseError, source + ": missing key '" + key + "'");
    double out = 0.0;
    if (!parse_double(it->second.first, out))
      throw Error(ErrorKind::ParseError, source + ":" + std::to_string(it->second.second) +
                                             ": bad number for '" + key + "'");
    return out;
  };

  VaporData d;
  d.format_version = static_cast<int>(number("format_version"));
  d.solid = {number("solid.a"), number("solid.b"), number("solid.c"), number("solid.d")};
  d.liquid = {number("liquid.a"), number("liquid.b"), number("liquid.c"), number("liquid.d")};
  d.melting_point_k = number("melting_point_K");
  d.valid_min_k = number("valid_min_K");
  d.valid_max_k = number("valid_max_K");
  d.atomic_mass_kg = number("atomic_mass_kg");
  d.sigma_se_cm2 = number("sigma_se_cm2");
  if (const auto it = kv.find("nuclear_spin"); it != kv.end()) {
    NuclearSpin::parse(it->second.first);
    d.nuclear_spin = it->second.first;
  }
  return d;
}

VaporData VaporData::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open " + path);
  return parse(in, path);
}

const VaporData& rb87_vapor_data() {
  static const VaporData data = [] {
    std::istringstream in(generated::kRb87VaporData);
    return VaporData::parse(in, "rb87_vapor.txt");
  }();
  return data;
}

VaporParams VaporParams::rb87(double temperature_k) {
  const VaporData& d = rb87_vapor_data();
  return {temperature_k, NuclearSpin::parse(d.nuclear_spin), d.atomic_mass_kg, d.sigma_se_cm2};
}

Rational nuclear_spin_prefactor_exact(NuclearSpin spin) {
  const Rational i = spin.exact();
  return (Rational(6) * i + Rational(1)) / (Rational(8) * i + Rational(4));
}

double nuclear_spin_prefactor(NuclearSpin spin) {
  return nuclear_spin_prefactor_exact(spin).to_double();
}

double mean_relative_velocity(double temperature_k, double mass_kg) {
  if (!(temperature_k > 0.0) || !(mass_kg > 0.0))
    throw Error(ErrorKind::InvalidArgument, "temperature and mass must be positive");
  const double v_si = std::sqrt(16.0 * kBoltzmann * temperature_k / (std::numbers::pi * mass_kg));
  return 100.0 * v_si;
}

double alkali_number_density(double temperature_k, const VaporData& data) {
  if (!(temperature_k >= data.valid_min_k && temperature_k <= data.valid_max_k))
    throw Error(ErrorKind::OutOfRange, "temperature " + std::to_string(temperature_k) +
                                           " K outside the vapor-pressure range");
  const VaporPressureCurve& curve =
      temperature_k < data.melting_point_k ? data.solid : data.liquid;
  const double pressure_pa = std::pow(10.0, curve.log10_torr(temperature_k)) * kPascalPerTorr;
  return pressure_pa / (kBoltzmann * temperature_k) * 1e-6;
}

SpinExchangeResult spin_exchange(const VaporParams& params, const VaporData& data) {
  if (!(params.sigma_se_cm2 > 0.0))
    throw Error(ErrorKind::InvalidArgument, "sigma_se must be positive");
  SpinExchangeResult r;
  r.n_cm3 = alkali_number_density(params.temperature_k, data);
  r.v_r_cm_s = mean_relative_velocity(params.temperature_k, params.atomic_mass_kg);
  r.gamma_se = nuclear_spin_prefactor(params.nuclear_spin) * params.sigma_se_cm2 * r.v_r_cm_s *
               r.n_cm3;
  r.width_hz = r.gamma_se / std::numbers::pi;
  return r;
}

}  // namespace cpt

#include <doctest.h>

#include <cmath>
#include <random>

#include "cpt/error.hpp"
#include "cpt/lineshape.hpp"
#include "cpt/presets.hpp"
#include "cpt/units.hpp"
#include "support/random_params.hpp"

using namespace cpt;

namespace {

// Lorentzian dip of half width hw (rad/s) on a unit baseline.
Lineshape synthetic_dip(double hw, double depth, double center, std::size_t n, double span) {
  Lineshape shape;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = center - span + 2.0 * span * static_cast<double>(i) / static_cast<double>(n - 1);
    const double x = d - center;
    shape.samples.push_back({d, 1.0 - depth * hw * hw / (x * x + hw * hw)});
  }
  shape.baseline = 1.0;
  return shape;
}

ModelParams at_strength(double s, Depolarization mode) {
  ModelParams p = fig1_optical_params(mode);
  p.rabi = rabi_for_pumping_strength(p, s);
  return p;
}

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("synthetic Lorentzian width and centre") {
  const double hw = hz_to_angular(500.0);
  const auto shape = synthetic_dip(hw, 0.05, hz_to_angular(37.0), 4001, 20.0 * hw);
  CHECK(fwhm(shape) == doctest::Approx(1000.0).epsilon(1e-3).scale(0));
  CHECK(angular_to_hz(resonance_center(shape)) == doctest::Approx(37.0).epsilon(1e-3).scale(0));
  CHECK(asymmetry(shape) < 1e-6);
  const auto m = lineshape_metrics(shape);
  CHECK(m.physical_contrast == doctest::Approx(0.05).epsilon(1e-9).scale(0));
  CHECK(m.qfactor == doctest::Approx(0.05 / m.fwhm_hz));
}

TEST_CASE("flat and one-sided lineshapes") {
  Lineshape flat;
  for (int i = 0; i < 10; ++i) flat.samples.push_back({double(i), 1.0});
  CHECK(kind_of([&] { fwhm(flat); }) == ErrorKind::NoResonance);

  const double hw = 1.0;
  const auto narrow = synthetic_dip(hw, 0.5, 0.0, 101, 0.5 * hw);
  CHECK(kind_of([&] { fwhm(narrow); }) == ErrorKind::Unbracketed);
}

TEST_CASE("low-power width tends to twice the ground relaxation") {
  for (double gg_hz : {100.0, 1000.0, 20000.0}) {
    ModelParams p = fig1_optical_params(Depolarization::None);
    p.gamma_g = hz_to_angular(gg_hz);
    p.rabi = rabi_for_pumping_strength(p, 1e-3);
    const double w = angular_to_hz(model_fwhm(p));
    CHECK(w == doctest::Approx(2.0 * gg_hz).epsilon(0.05).scale(0));
    const auto shape = sweep(p, default_sweep(p, 401, Spacing::Adaptive));
    CHECK(fwhm(shape) == doctest::Approx(w).epsilon(0.01).scale(0));
  }
}

TEST_CASE("power-broadening calibration round trip") {
  const ModelParams base = fig1_optical_params(Depolarization::None);
  ModelParams probe = base;
  probe.rabi = rabi_for_pumping_strength(base, 1e-3);
  const double w0 = model_fwhm(probe);
  for (double multiple : {0.5, 3.0, 10.0}) {
    ModelParams p = base;
    p.rabi = calibrate_power_broadening(base, multiple);
    CHECK(model_fwhm(p) == doctest::Approx((1.0 + multiple) * w0).epsilon(0.01).scale(0));
  }
  CHECK(calibrate_power_broadening(base, 0.0) == doctest::Approx(probe.rabi));
  CHECK(kind_of([&] { calibrate_power_broadening(base, 1e9); }) == ErrorKind::NotBracketed);
  CHECK(kind_of([&] { calibrate_power_broadening(base, -1.0); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("contrast in the two depolarization limits") {
  const auto none = physical_contrast(at_strength(1e3, Depolarization::None));
  const auto full = physical_contrast(at_strength(1e3, Depolarization::Complete));
  CHECK(none.physical_contrast == doctest::Approx(0.2998641).epsilon(1e-4).scale(0));
  CHECK(full.physical_contrast == doctest::Approx(0.5680267).epsilon(1e-4).scale(0));
  CHECK(full.physical_contrast / none.physical_contrast == doctest::Approx(1.894280).epsilon(1e-4).scale(0));
}

TEST_CASE("weak pumping: small contrast, linear in the pumping strength") {
  const double c1 = physical_contrast(at_strength(1e-3, Depolarization::None)).physical_contrast;
  const double c2 = physical_contrast(at_strength(5e-4, Depolarization::None)).physical_contrast;
  CHECK(c1 < 1e-3);
  CHECK(c1 == doctest::Approx(1.5907e-4).epsilon(1e-3).scale(0));
  CHECK(c1 / c2 == doctest::Approx(2.0).epsilon(1e-3).scale(0));
  const double c3 = physical_contrast(at_strength(1e-3, Depolarization::Complete)).physical_contrast;
  CHECK(c3 < 1e-3);
}

TEST_CASE("contrast ratio increases with pumping strength") {
  double previous = 0.0;
  for (double s : {10.0, 30.0, 100.0, 300.0, 1000.0}) {
    const double r = physical_contrast(at_strength(s, Depolarization::Complete)).physical_contrast /
                     physical_contrast(at_strength(s, Depolarization::None)).physical_contrast;
    CHECK(r > previous);
    previous = r;
  }
}

TEST_CASE("asymptotic baseline is the far-wing level") {
  const ModelParams p = fig1_preset(Depolarization::None);
  const double level = asymptotic_baseline(p);
  const double w = estimated_half_width(p);
  CHECK(rho_ee_at(p, 1e5 * w) == doctest::Approx(level).epsilon(1e-5).scale(0));
  CHECK(rho_ee_at(p, 0.0) < level);
}

TEST_CASE("complete-mode lineshapes are symmetric, undepolarized ones are not") {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 5; ++i) {
    const ModelParams p = testing_support::random_params(rng, Depolarization::Complete).with_raman(0.0);
    const auto shape = sweep(p, default_sweep(p, 201, Spacing::Linear));
    CHECK(symmetry_defect(shape) < 1e-8);
  }
  const ModelParams p = fig1_preset(Depolarization::None);
  const auto spec = default_sweep(p, 401, Spacing::Linear);
  const double a_none = asymmetry(sweep(p, spec));
  const double a_full = asymmetry(sweep(p.with_mode(Depolarization::Complete), spec));
  CHECK(a_none > a_full);
  CHECK(a_full < 1e-6);
}

TEST_CASE("adaptive sweep resolves the dip") {
  const ModelParams p = fig1_preset(Depolarization::None);
  const auto shape = sweep(p, default_sweep(p, 41, Spacing::Adaptive));
  const double w = hz_to_angular(fwhm(shape));
  const double c = resonance_center(shape);
  std::size_t inside = 0;
  for (const auto& s : shape.samples)
    if (std::abs(s.delta_raman - c) <= 0.5 * w) ++inside;
  CHECK(inside >= 50);
  for (std::size_t i = 1; i < shape.samples.size(); ++i)
    CHECK(shape.samples[i].delta_raman > shape.samples[i - 1].delta_raman);
}

TEST_CASE("sweep over a flat region") {
  const ModelParams p = fig1_preset(Depolarization::None);
  const double w = estimated_half_width(p);
  const auto shape = sweep(p, {1e3 * w, 1e3 * w + 10.0 * w, 3, Spacing::Linear});
  CHECK(kind_of([&] { lineshape_metrics(shape); }) == ErrorKind::NoResonance);
}

TEST_CASE("sweep errors carry the failing detuning") {
  ModelParams p = fig1_preset(Depolarization::None);
  CHECK(kind_of([&] { sweep(p, {1.0, 0.0, 10, Spacing::Linear}); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([&] { sweep(p, {0.0, 1.0, 2, Spacing::Linear}); }) == ErrorKind::InvalidArgument);
  p.gamma_g = 0.0;
  CHECK(kind_of([&] { sweep(p, {-1.0, 1.0, 5, Spacing::Linear}); }) == ErrorKind::SingularSystem);
}

TEST_CASE("qfactor needs a width") {
  ResonanceMetrics m;
  m.physical_contrast = 0.1;
  CHECK(kind_of([&] { qfactor(m); }) == ErrorKind::InvalidArgument);
}

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "cpt/coupling.hpp"
#include "cpt/error.hpp"
#include "cpt/lineshape.hpp"
#include "cpt/presets.hpp"
#include "cpt/scan.hpp"
#include "cpt/units.hpp"
#include "cpt/vapor.hpp"
#include "support/cli_harness.hpp"
#include "support/model_oracle.hpp"
#include "support/random_params.hpp"
#include "support/synthetic_scan.hpp"

using namespace cpt;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail = what;
      pass = false;
    }
  }
};

struct Criterion {
  int id;
  std::string name;
  double budget_s;
  std::function<Outcome()> run;
};

ModelParams at_strength(double s, Depolarization mode) {
  ModelParams p = fig1_optical_params(mode);
  p.rabi = rabi_for_pumping_strength(p, s);
  return p;
}

Outcome contrast_doubling() {
  Outcome o;
  const double none = physical_contrast(at_strength(1e3, Depolarization::None)).physical_contrast;
  const double full = physical_contrast(at_strength(1e3, Depolarization::Complete)).physical_contrast;
  const double ratio = full / none;
  o.detail = fmt::format("ratio = {:.6f} (contrast {:.6f} vs {:.6f})", ratio, full, none);
  o.pass = ratio >= 1.9 && ratio <= 2.1;
  return o;
}

Outcome fig1_populations() {
  Outcome o;
  const auto none = solve_steady_state(fig1_preset(Depolarization::None));
  const auto full = solve_steady_state(fig1_preset(Depolarization::Complete));
  std::size_t argmax = 0;
  for (std::size_t i = 1; i < kLevelCount; ++i)
    if (none.ground.values[i] > none.ground.values[argmax]) argmax = i;
  o.require(argmax == level_index(2, 2), "undepolarized maximum not at (2,+2)");
  o.require(full.ground(2, 2) < none.ground(2, 2), "(2,+2) not reduced");
  o.require(full.ground(2, 0) > none.ground(2, 0), "(2,0) not increased");
  o.require(full.ground(1, 0) > none.ground(1, 0), "(1,0) not increased");
  o.require(full.ground(1, 1) < full.ground(1, -1), "(1,+1) not below (1,-1)");
  if (o.pass)
    o.detail = fmt::format("(2,+2): {:.4f} -> {:.4f}; (1,+1) {:.4f} < (1,-1) {:.4f}", none.ground(2, 2),
                           full.ground(2, 2), full.ground(1, 1), full.ground(1, -1));
  return o;
}

Outcome solver_correctness() {
  Outcome o;
  std::mt19937_64 rng(1000);
  double worst_ratio = 0.0, worst_trace = 0.0, lowest = 1.0;
  for (int i = 0; i < 1000; ++i) {
    const auto mode = i % 2 ? Depolarization::Complete : Depolarization::None;
    const ModelParams p = testing_support::random_params(rng, mode);
    const auto s = solve_steady_state(p);
    const oracle::Inputs in{p.rabi,      p.gamma_opt, p.gamma_nat,   p.gamma_g,
                            p.omega_e,   p.delta_opt, p.delta_raman, mode == Depolarization::Complete};
    const double r = oracle::max_residual(in, oracle::from_array(s.ground.values, s.coherence));
    worst_ratio = std::max(worst_ratio, r / (1e-10 * std::max(1.0, p.gamma_g)));
    worst_trace = std::max(worst_trace, std::abs(s.ground.sum() - 1.0));
    for (double v : s.ground.values) lowest = std::min(lowest, v);
  }
  o.require(worst_ratio < 1.0, "oracle residual above tolerance");
  o.require(worst_trace <= 1e-10, "trace off");
  o.require(lowest >= -1e-12, "negative population");
  o.detail = fmt::format("max residual/tol = {:.2e}, max |trace-1| = {:.2e}, min population = {:.3e}",
                         worst_ratio, worst_trace, lowest);
  return o;
}

Outcome symmetry() {
  Outcome o;
  std::mt19937_64 rng(4);
  double worst = 0.0;
  int ordered = 0;
  for (int i = 0; i < 20; ++i) {
    ModelParams p = testing_support::random_params(rng, Depolarization::Complete).with_raman(0.0);
    p.delta_opt = hz_to_angular(-30e6);
    const auto spec = default_sweep(p, 401, Spacing::Linear);
    const auto full = sweep(p, spec);
    worst = std::max(worst, symmetry_defect(full));
    const auto none = sweep(p.with_mode(Depolarization::None), spec);
    if (asymmetry(none) > asymmetry(full)) ++ordered;
  }
  o.require(worst < 1e-8, "complete-mode lineshape not symmetric");
  o.require(ordered == 20, "undepolarized asymmetry not larger");
  o.detail = fmt::format("max symmetry defect = {:.2e}; asymmetry None > Complete in {}/20", worst,
                         ordered);
  return o;
}

Outcome coupling_audit() {
  Outcome o;
  const auto problems = audit_coupling_tables(coupling_tables());
  o.pass = problems.empty();
  o.detail = problems.empty() ? "all rational identities hold" : problems.front();
  return o;
}

Outcome spin_exchange_formula() {
  Outcome o;
  o.require(nuclear_spin_prefactor_exact(NuclearSpin::parse("3/2")) == Rational{5, 8}, "I=3/2");
  o.require(nuclear_spin_prefactor_exact(NuclearSpin::parse("7/2")) == Rational{11, 16}, "I=7/2");
  o.require(nuclear_spin_prefactor(NuclearSpin::parse("3/2")) == 0.625, "0.625");
  o.require(nuclear_spin_prefactor(NuclearSpin::parse("7/2")) == 0.6875, "0.6875");

  VaporParams p = VaporParams::rb87(60.0 + kZeroCelsius);
  const auto a = spin_exchange(p);
  p.sigma_se_cm2 *= 3.0;
  o.require(std::abs(spin_exchange(p).gamma_se / a.gamma_se - 3.0) < 1e-14, "not linear in sigma");
  o.require(std::abs(a.gamma_se / (0.625 * 1.9e-14 * a.v_r_cm_s * a.n_cm3) - 1.0) < 1e-14,
            "not linear in n");

  double previous = 0.0;
  for (int c = 50; c <= 90; ++c) {
    const double w = spin_exchange(VaporParams::rb87(c + kZeroCelsius)).width_hz;
    o.require(w > previous, "width not increasing");
    previous = w;
  }
  if (o.pass)
    o.detail = fmt::format("width {:.2f} Hz at 50 C to {:.2f} Hz at 90 C",
                           spin_exchange(VaporParams::rb87(50 + kZeroCelsius)).width_hz, previous);
  return o;
}

Outcome lineshape_oracles() {
  Outcome o;
  Lineshape synthetic;
  const double hw = hz_to_angular(500.0);
  for (int i = 0; i <= 4000; ++i) {
    const double d = -20.0 * hw + 40.0 * hw * i / 4000.0;
    synthetic.samples.push_back({d, 1.0 - 0.05 * hw * hw / (d * d + hw * hw)});
  }
  synthetic.baseline = 1.0;
  const double w_syn = fwhm(synthetic);
  o.require(std::abs(w_syn / 1000.0 - 1.0) < 1e-3, "synthetic FWHM");

  ModelParams p = at_strength(1e-3, Depolarization::None);
  const double w_low = angular_to_hz(model_fwhm(p));
  const double target = 2.0 * angular_to_hz(p.gamma_g);
  o.require(std::abs(w_low / target - 1.0) < 0.05, "low-power width");

  const ModelParams base = fig1_optical_params();
  const double w0 = model_fwhm(at_strength(1e-3, Depolarization::None));
  double worst = 0.0;
  for (double m : {1.0, 3.0, 10.0}) {
    ModelParams q = base;
    q.rabi = calibrate_power_broadening(base, m);
    worst = std::max(worst, std::abs(model_fwhm(q) / ((1.0 + m) * w0) - 1.0));
  }
  o.require(worst < 0.01, "calibration round trip");
  o.detail = fmt::format("synthetic {:.4f} Hz, low-power {:.2f} Hz vs {:.2f} Hz, calibration error {:.2e}",
                         w_syn, w_low, target, worst);
  return o;
}

Outcome scan_round_trip() {
  Outcome o;
  testing_support::LorentzianSpec spec;
  spec.noise = 0.01;
  spec.points = 40001;
  double dc = 0.0, dw = 0.0, dk = 0.0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto r = fit_resonance(testing_support::synthetic_scan(spec, seed));
    dc = std::max(dc, std::abs(r.metrics.center_hz));
    dw = std::max(dw, std::abs(r.metrics.fwhm_hz / 1000.0 - 1.0));
    dk = std::max(dk, std::abs(r.metrics.physical_contrast - 0.05));
  }
  o.require(dc <= 20.0, "center");
  o.require(dw <= 0.03, "FWHM");
  o.require(dk <= 0.003, "contrast");

  const Scan scan = testing_support::synthetic_scan(spec, 7);
  const auto base = fit_resonance(scan);
  Scan scaled = scan;
  for (double& v : scaled.signal) v *= 2.5;
  Scan shifted = scan;
  for (double& f : shifted.frequency_hz) f += 1.5e4;
  const auto s = fit_resonance(scaled);
  const auto t = fit_resonance(shifted);
  const auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
  const double eq = std::max({rel(s.metrics.physical_contrast, base.metrics.physical_contrast),
                              rel(s.metrics.fwhm_hz, base.metrics.fwhm_hz),
                              rel(s.metrics.qfactor, base.metrics.qfactor),
                              rel(s.metrics.amplitude, 2.5 * base.metrics.amplitude),
                              std::abs(s.metrics.center_hz - base.metrics.center_hz) / base.metrics.fwhm_hz,
                              rel(t.metrics.fwhm_hz, base.metrics.fwhm_hz),
                              rel(t.metrics.physical_contrast, base.metrics.physical_contrast),
                              std::abs(t.metrics.center_hz - 1.5e4 - base.metrics.center_hz) /
                                  base.metrics.fwhm_hz});
  o.require(eq < 1e-8, "equivariance");
  o.detail = fmt::format("max |dcenter| {:.2f} Hz, |dFWHM| {:.2f}%, |dcontrast| {:.3f} pp; equivariance {:.1e}",
                         dc, 100.0 * dw, 100.0 * dk, eq);
  return o;
}

Outcome determinism() {
  Outcome o;
  using testing_support::TempDir;
  TempDir dir("acceptance");
  for (int i = 0; i < 3; ++i) {
    testing_support::LorentzianSpec s;
    s.noise = 0.002;
    s.fwhm_hz = 800.0 + 200.0 * i;
    const Scan scan = testing_support::synthetic_scan(s, 3 + i);
    std::string text = fmt::format("# intensity_mW_cm2 = {}\n", i + 1);
    for (std::size_t k = 0; k < scan.size(); ++k)
      text += fmt::format("{:.17g},{:.17g}\n", scan.frequency_hz[k], scan.signal[k]);
    testing_support::write_file(dir / fmt::format("s{}.csv", i), text);
  }
  testing_support::write_file(dir / "model.cfg", "preset = fig1\nmode = complete\n");

  const std::vector<std::vector<std::string>> commands = {
      {"solve", "--config", dir / "model.cfg"},
      {"sweep", "--config", dir / "model.cfg"},
      {"contrast-ratio", "--strengths", "1,100"},
      {"power-broadening"},
      {"spin-exchange"},
      {"analyze", dir.path().string()},
  };
  int identical = 0;
  for (const auto& cmd : commands) {
    std::vector<std::string> contents;
    for (int run = 0; run < 2; ++run) {
      const std::string out = dir / fmt::format("{}_{}.out", cmd.front(), run);
      auto args = cmd;
      args.push_back("--out");
      args.push_back(out);
      const auto r = testing_support::run_cli(args);
      o.require(r.code == 0, cmd.front() + " failed");
      contents.push_back(testing_support::read_file(out));
    }
    if (contents[0] == contents[1] && !contents[0].empty())
      ++identical;
    else
      o.require(false, cmd.front() + " output differs");
  }
  o.detail += fmt::format("{}/{} subcommands byte-identical", identical, commands.size());
  return o;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "contrast doubling with excited-state depolarization", 5.0, contrast_doubling},
      {2, "reference population distribution", 1.0, fig1_populations},
      {3, "solver correctness against the residual oracle", 30.0, solver_correctness},
      {4, "lineshape symmetry", 60.0, symmetry},
      {5, "coupling-table audit", 1.0, coupling_audit},
      {6, "spin-exchange formula", 1.0, spin_exchange_formula},
      {7, "lineshape metric oracles", 30.0, lineshape_oracles},
      {8, "scan-analysis round trip", 60.0, scan_round_trip},
      {9, "CLI determinism", 60.0, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (dt > c.budget_s) {
      o.detail += fmt::format(" [over time budget {:.0f} s]", c.budget_s);
      o.pass = false;
    }
    if (!o.pass) ++failed;
    std::printf("%s  criterion %d: %s (%.2f s) - %s\n", o.pass ? "PASS" : "FAIL", c.id,
                c.name.c_str(), dt, o.detail.c_str());
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}

#include "cpt/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "cpt/error.hpp"
#include "cpt/lineshape.hpp"
#include "cpt/presets.hpp"
#include "cpt/scan.hpp"
#include "cpt/units.hpp"
#include "cpt/vapor.hpp"

namespace cpt::cli {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

std::string num(double v) { return fmt::format("{:.17g}", v); }

struct Common {
  std::string config;
  std::string out;
  std::string format = "csv";
};

struct ModelOptions {
  std::string preset;
  std::string mode = "none";
  std::optional<double> rabi_hz;
  std::optional<double> pump_strength;
  std::optional<double> gamma_opt_hz;
  std::optional<double> gamma_nat_hz;
  std::optional<double> gamma_g_hz;
  std::optional<double> omega_e_hz;
  std::optional<double> delta_opt_hz;
  std::optional<double> delta_raman_hz;
  double power_multiple = kFig1BroadeningMultiple;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "flat 'key = value' file mirroring these flags");
  app->add_option("--out", c.out, "output path (default: stdout)");
  app->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

void add_model(CLI::App* app, ModelOptions& m, bool with_mode_both) {
  app->add_option("--preset", m.preset, "fig1: reference optical parameters, V calibrated")
      ->check(CLI::IsMember({"fig1"}));
  std::vector<std::string> modes{"none", "complete"};
  if (with_mode_both) modes.emplace_back("both");
  app->add_option("--mode", m.mode, "excited-state depolarization")->check(CLI::IsMember(modes));
  app->add_option("--rabi-hz", m.rabi_hz, "Rabi frequency V/2pi, Hz");
  app->add_option("--pump-strength", m.pump_strength, "alternative to --rabi-hz: V^2 l_u / Gamma_g");
  app->add_option("--gamma-opt-hz", m.gamma_opt_hz, "optical relaxation Gamma/2pi, Hz");
  app->add_option("--gamma-nat-hz", m.gamma_nat_hz, "natural width gamma/2pi, Hz");
  app->add_option("--gamma-g-hz", m.gamma_g_hz, "ground relaxation Gamma_g/2pi, Hz");
  app->add_option("--omega-e-hz", m.omega_e_hz, "excited hyperfine splitting/2pi, Hz");
  app->add_option("--delta-opt-hz", m.delta_opt_hz, "optical detuning Delta/2pi, Hz");
  app->add_option("--delta-raman-hz", m.delta_raman_hz, "two-photon detuning delta/2pi, Hz");
  app->add_option("--power-multiple", m.power_multiple,
                  "broadening multiple used by --preset fig1 (default 3)");
}

Depolarization parse_mode(const std::string& s) {
  return s == "complete" ? Depolarization::Complete : Depolarization::None;
}

ModelParams optical_params(const ModelOptions& o) {
  ModelParams p = fig1_optical_params();
  if (o.gamma_opt_hz) p.gamma_opt = hz_to_angular(*o.gamma_opt_hz);
  if (o.gamma_nat_hz) p.gamma_nat = hz_to_angular(*o.gamma_nat_hz);
  if (o.gamma_g_hz) p.gamma_g = hz_to_angular(*o.gamma_g_hz);
  if (o.omega_e_hz) p.omega_e = hz_to_angular(*o.omega_e_hz);
  if (o.delta_opt_hz) p.delta_opt = hz_to_angular(*o.delta_opt_hz);
  if (o.delta_raman_hz) p.delta_raman = hz_to_angular(*o.delta_raman_hz);
  p.depolarization = parse_mode(o.mode);
  try {
    p.validate();
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InvalidArgument) throw;
    throw Error(ErrorKind::ConfigError, e.detail());
  }
  return p;
}

// Full parameter set including V, resolved in the order --rabi-hz,
// --pump-strength, preset calibration.
ModelParams model_params(const ModelOptions& o) {
  ModelParams p = optical_params(o);
  if (o.rabi_hz && o.pump_strength)
    throw Error(ErrorKind::ConfigError, "rabi-hz and pump-strength are mutually exclusive");
  if (o.rabi_hz) {
    if (*o.rabi_hz < 0.0) throw Error(ErrorKind::ConfigError, "rabi-hz must be >= 0");
    p.rabi = hz_to_angular(*o.rabi_hz);
  } else if (o.pump_strength) {
    if (*o.pump_strength < 0.0) throw Error(ErrorKind::ConfigError, "pump-strength must be >= 0");
    p.rabi = rabi_for_pumping_strength(p, *o.pump_strength);
  } else if (o.preset == "fig1") {
    ModelParams calib = p;
    calib.depolarization = Depolarization::None;
    p.rabi = calibrate_power_broadening(calib, o.power_multiple);
  } else {
    throw Error(ErrorKind::ConfigError, "one of rabi-hz, pump-strength or preset is required");
  }
  return p;
}

Json params_json(const ModelParams& p) {
  Json j;
  j["rabi_hz"] = angular_to_hz(p.rabi);
  j["gamma_opt_hz"] = angular_to_hz(p.gamma_opt);
  j["gamma_nat_hz"] = angular_to_hz(p.gamma_nat);
  j["gamma_g_hz"] = angular_to_hz(p.gamma_g);
  j["omega_e_hz"] = angular_to_hz(p.omega_e);
  j["delta_opt_hz"] = angular_to_hz(p.delta_opt);
  j["delta_raman_hz"] = angular_to_hz(p.delta_raman);
  j["pump_strength"] = pumping_strength(p);
  j["mode"] = p.depolarization == Depolarization::Complete ? "complete" : "none";
  return j;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

void write_atomic(const std::string& path, const std::string& text) {
  const fs::path target(path);
  if (target.has_parent_path() && !fs::exists(target.parent_path()))
    throw Error(ErrorKind::ConfigError, "output directory does not exist: " +
                                            target.parent_path().string());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorKind::ConfigError, "cannot write " + tmp.string());
    f << text;
    if (!f) throw Error(ErrorKind::ConfigError, "cannot write " + tmp.string());
  }
  fs::rename(tmp, target);
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty())
    out << text;
  else
    write_atomic(path, text);
}

std::string sibling(const std::string& path, const std::string& extension) {
  fs::path p(path);
  p.replace_extension(extension);
  return p.string();
}

// ---------------------------------------------------------------- solve

int cmd_solve(const Common& c, const ModelOptions& m, std::ostream& out) {
  ModelParams base = model_params(m);
  std::vector<Depolarization> modes;
  if (m.mode == "both")
    modes = {Depolarization::None, Depolarization::Complete};
  else
    modes = {parse_mode(m.mode)};

  std::string csv = "mode,quantity,F,m,value\n";
  Json doc;
  doc["params"] = params_json(base.with_mode(modes.front()));
  doc["solutions"] = Json::array();
  for (Depolarization mode : modes) {
    const ModelParams p = base.with_mode(mode);
    const SteadyStateSolution s = solve_steady_state(p);
    const std::string name = mode == Depolarization::Complete ? "complete" : "none";
    const auto rows = [&](const char* quantity, const std::array<double, kLevelCount>& v,
                          const std::array<Sublevel, kLevelCount>& levels) {
      Json arr = Json::array();
      for (std::size_t i = 0; i < kLevelCount; ++i) {
        csv += fmt::format("{},{},{},{},{}\n", name, quantity, levels[i].f, levels[i].m, num(v[i]));
        arr.push_back({{"F", levels[i].f}, {"m", levels[i].m}, {"population", v[i]}});
      }
      return arr;
    };
    Json js;
    js["mode"] = name;
    js["ground"] = rows("ground", s.ground.values, kGroundLevels);
    js["excited_bare"] = rows("excited_bare", s.excited_bare.values, kExcitedLevels);
    js["excited_effective"] = rows("excited_effective", s.excited_effective.values, kExcitedLevels);
    js["coherence_re"] = s.coherence.real();
    js["coherence_im"] = s.coherence.imag();
    js["rho_ee"] = s.rho_ee;
    js["residual_norm"] = s.residual_norm;
    js["rabi_hz"] = angular_to_hz(p.rabi);
    js["validity"] = {{"natural_to_optical", s.validity.natural_to_optical},
                      {"saturation", s.validity.saturation},
                      {"natural_width_small", s.validity.natural_width_small},
                      {"low_saturation", s.validity.low_saturation}};
    csv += fmt::format("{},coherence_re,,,{}\n", name, num(s.coherence.real()));
    csv += fmt::format("{},coherence_im,,,{}\n", name, num(s.coherence.imag()));
    csv += fmt::format("{},rho_ee,,,{}\n", name, num(s.rho_ee));
    csv += fmt::format("{},residual_norm,,,{}\n", name, num(s.residual_norm));
    csv += fmt::format("{},rabi_hz,,,{}\n", name, num(angular_to_hz(p.rabi)));
    doc["solutions"].push_back(js);
  }
  emit(c.format == "json" ? doc.dump(2) + "\n" : csv, c.out, out);
  return kExitOk;
}

// ---------------------------------------------------------------- sweep

struct SweepOptions {
  std::optional<double> delta_min_hz;
  std::optional<double> delta_max_hz;
  std::size_t points = 401;
  std::string spacing = "adaptive";
  double span_widths = 20.0;
  std::string metrics;
};

Json metrics_json(const ResonanceMetrics& m) {
  return {{"baseline", m.baseline},   {"amplitude", m.amplitude},
          {"physical_contrast", m.physical_contrast},
          {"fwhm_hz", m.fwhm_hz},     {"center_hz", m.center_hz},
          {"asymmetry", m.asymmetry}, {"qfactor_per_hz", m.qfactor}};
}

int cmd_sweep(const Common& c, const ModelOptions& m, const SweepOptions& so, std::ostream& out,
              std::ostream& err) {
  const ModelParams p = model_params(m);
  const Spacing spacing = so.spacing == "linear" ? Spacing::Linear : Spacing::Adaptive;
  SweepSpec spec = default_sweep(p, so.points, spacing, so.span_widths);
  if (so.delta_min_hz) spec.delta_min = hz_to_angular(*so.delta_min_hz);
  if (so.delta_max_hz) spec.delta_max = hz_to_angular(*so.delta_max_hz);
  try {
    spec.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::ConfigError, e.detail());
  }

  const Lineshape shape = sweep(p, spec);
  ResonanceMetrics metrics = lineshape_metrics(shape);
  const ContrastResult pc = physical_contrast(p);
  metrics.baseline = pc.baseline;
  metrics.amplitude = pc.amplitude;
  metrics.physical_contrast = pc.physical_contrast;
  metrics.qfactor = qfactor(metrics);

  Json mj = metrics_json(metrics);
  mj["symmetry_defect"] = symmetry_defect(shape);
  mj["samples"] = shape.samples.size();
  mj["params"] = params_json(p);

  if (c.format == "json") {
    Json doc;
    doc["metrics"] = mj;
    Json arr = Json::array();
    for (const auto& s : shape.samples)
      arr.push_back({{"delta_hz", angular_to_hz(s.delta_raman)}, {"rho_ee", s.rho_ee}});
    doc["lineshape"] = arr;
    emit(doc.dump(2) + "\n", c.out, out);
    return kExitOk;
  }

  std::string csv = "delta_hz,rho_ee\n";
  for (const auto& s : shape.samples)
    csv += num(angular_to_hz(s.delta_raman)) + "," + num(s.rho_ee) + "\n";
  emit(csv, c.out, out);
  const std::string metrics_text = mj.dump(2) + "\n";
  if (!so.metrics.empty())
    write_atomic(so.metrics, metrics_text);
  else if (!c.out.empty())
    write_atomic(sibling(c.out, ".metrics.json"), metrics_text);
  else
    err << metrics_text;
  return kExitOk;
}

// ---------------------------------------------------------------- contrast-ratio

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument("");
      out.push_back(v);
    } catch (const std::exception&) {
      throw Error(ErrorKind::ConfigError, "strengths: cannot read '" + item + "'");
    }
  }
  if (out.empty()) throw Error(ErrorKind::ConfigError, "strengths: empty list");
  return out;
}

int cmd_contrast_ratio(const Common& c, const ModelOptions& m, const std::string& strengths,
                       std::ostream& out) {
  const ModelParams base = optical_params(m);
  std::string csv = "pump_strength,contrast_none,contrast_complete,ratio\n";
  Json rows = Json::array();
  for (double s : parse_list(strengths)) {
    if (!(s > 0.0)) throw Error(ErrorKind::ConfigError, "strengths must be > 0");
    ModelParams p = base;
    p.rabi = rabi_for_pumping_strength(p, s);
    const double none = physical_contrast(p.with_mode(Depolarization::None)).physical_contrast;
    const double full = physical_contrast(p.with_mode(Depolarization::Complete)).physical_contrast;
    const double ratio = full / none;
    csv += fmt::format("{},{},{},{}\n", num(s), num(none), num(full), num(ratio));
    rows.push_back({{"pump_strength", s},
                    {"contrast_none", none},
                    {"contrast_complete", full},
                    {"ratio", ratio}});
  }
  Json doc;
  doc["params"] = params_json(base);
  doc["rows"] = rows;
  emit(c.format == "json" ? doc.dump(2) + "\n" : csv, c.out, out);
  return kExitOk;
}

// ---------------------------------------------------------------- power-broadening

int cmd_power_broadening(const Common& c, const ModelOptions& m, double multiple,
                         std::ostream& out) {
  ModelParams p = optical_params(m);
  const double rabi = calibrate_power_broadening(p, multiple);
  ModelParams probe = p;
  probe.rabi = rabi_for_pumping_strength(p, 1e-3);
  p.rabi = rabi;
  const double w0 = angular_to_hz(model_fwhm(probe));
  const double w = angular_to_hz(model_fwhm(p));
  if (c.format == "json") {
    Json doc{{"multiple", multiple},   {"rabi_hz", angular_to_hz(rabi)},
             {"pump_strength", pumping_strength(p)},
             {"fwhm_probe_hz", w0},    {"fwhm_hz", w},
             {"params", params_json(p)}};
    emit(doc.dump(2) + "\n", c.out, out);
  } else {
    emit(fmt::format("multiple,rabi_hz,pump_strength,fwhm_probe_hz,fwhm_hz\n{},{},{},{},{}\n",
                     num(multiple), num(angular_to_hz(rabi)), num(pumping_strength(p)), num(w0),
                     num(w)),
         c.out, out);
  }
  return kExitOk;
}

// ---------------------------------------------------------------- spin-exchange

struct SpinOptions {
  double t_min_c = 50.0;
  double t_max_c = 90.0;
  double t_step_c = 1.0;
  std::string nuclear_spin;
  std::optional<double> sigma_se_cm2;
  std::optional<double> atomic_mass_kg;
  std::string vapor_data;
};

int cmd_spin_exchange(const Common& c, const SpinOptions& o, std::ostream& out) {
  const VaporData data = o.vapor_data.empty() ? rb87_vapor_data() : VaporData::load(o.vapor_data);
  if (!(o.t_step_c > 0.0) || !(o.t_max_c >= o.t_min_c))
    throw Error(ErrorKind::ConfigError, "temperature range needs t-min-c <= t-max-c, t-step-c > 0");
  VaporParams vp;
  vp.nuclear_spin = NuclearSpin::parse(o.nuclear_spin.empty() ? data.nuclear_spin : o.nuclear_spin);
  vp.atomic_mass_kg = o.atomic_mass_kg.value_or(data.atomic_mass_kg);
  vp.sigma_se_cm2 = o.sigma_se_cm2.value_or(data.sigma_se_cm2);

  std::string csv = "temperature_C,n_cm3,vr_cm_s,gamma_se_rad_s,width_hz\n";
  Json rows = Json::array();
  const auto steps = static_cast<long>(std::floor((o.t_max_c - o.t_min_c) / o.t_step_c + 1e-9));
  for (long i = 0; i <= steps; ++i) {
    const double t_c = o.t_min_c + static_cast<double>(i) * o.t_step_c;
    vp.temperature_k = t_c + kZeroCelsius;
    const SpinExchangeResult r = spin_exchange(vp, data);
    csv += fmt::format("{},{},{},{},{}\n", num(t_c), num(r.n_cm3), num(r.v_r_cm_s),
                       num(r.gamma_se), num(r.width_hz));
    rows.push_back({{"temperature_C", t_c},
                    {"n_cm3", r.n_cm3},
                    {"vr_cm_s", r.v_r_cm_s},
                    {"gamma_se_rad_s", r.gamma_se},
                    {"width_hz", r.width_hz}});
  }
  Json doc{{"nuclear_spin", vp.nuclear_spin.value()},
           {"prefactor", nuclear_spin_prefactor(vp.nuclear_spin)},
           {"sigma_se_cm2", vp.sigma_se_cm2},
           {"atomic_mass_kg", vp.atomic_mass_kg},
           {"rows", rows}};
  emit(c.format == "json" ? doc.dump(2) + "\n" : csv, c.out, out);
  return kExitOk;
}

// ---------------------------------------------------------------- analyze

std::vector<std::string> expand_inputs(const std::vector<std::string>& inputs) {
  std::vector<std::string> files;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<std::string> found;
      for (const auto& entry : fs::directory_iterator(in))
        if (entry.is_regular_file() && entry.path().extension() == ".csv")
          found.push_back(entry.path().string());
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (fs::exists(in)) {
      files.push_back(in);
    } else {
      throw Error(ErrorKind::ConfigError, "input does not exist: " + in);
    }
  }
  return files;
}

int cmd_analyze(const Common& c, const std::vector<std::string>& inputs,
                const std::string& vary_key, std::ostream& out, std::ostream& err) {
  const auto files = expand_inputs(inputs);
  if (files.empty()) throw Error(ErrorKind::ConfigError, "no scan files to analyze");
  const BatchTable table = analyze_files(files, vary_key);

  std::set<std::string> keys;
  for (const auto& row : table.rows)
    for (const auto& [k, v] : row.metadata) keys.insert(k);

  std::string csv = "row_type,source";
  for (const auto& k : keys) csv += "," + csv_field(k);
  csv += ",status,center_hz,fwhm_hz,fwhm_direct_hz,amplitude,baseline,contrast,asymmetry,"
         "qfactor_per_hz,rms_residual,baseline_rms,iterations,converged\n";

  const auto row_csv = [&](const char* type, const BatchRow& row) {
    std::string line = std::string(type) + "," + csv_field(row.source);
    for (const auto& k : keys) {
      const auto it = row.metadata.find(k);
      line += "," + (it == row.metadata.end() ? std::string() : csv_field(it->second));
    }
    line += "," + row.status;
    if (row.fit) {
      const auto& f = *row.fit;
      const auto& mm = f.metrics;
      line += fmt::format(",{},{},{},{},{},{},{},{},{},{},{},{}", num(mm.center_hz),
                          num(mm.fwhm_hz), f.fwhm_direct_hz ? num(*f.fwhm_direct_hz) : "",
                          num(mm.amplitude), num(mm.baseline), num(mm.physical_contrast),
                          num(mm.asymmetry), num(mm.qfactor), num(f.rms_residual),
                          num(f.baseline_rms), f.iterations, f.converged ? "true" : "false");
    } else {
      line += ",,,,,,,,,,,,";
    }
    return line + "\n";
  };
  const auto row_json = [&](const BatchRow& row) {
    Json j{{"source", row.source}, {"metadata", row.metadata}, {"status", row.status}};
    if (row.fit) {
      const auto& f = *row.fit;
      j["metrics"] = metrics_json(f.metrics);
      j["fwhm_direct_hz"] = f.fwhm_direct_hz ? Json(*f.fwhm_direct_hz) : Json(nullptr);
      j["rms_residual"] = f.rms_residual;
      j["baseline_rms"] = f.baseline_rms;
      j["iterations"] = f.iterations;
      j["converged"] = f.converged;
    }
    return j;
  };

  Json doc;
  doc["vary_key"] = vary_key;
  doc["rows"] = Json::array();
  for (const auto& row : table.rows) {
    csv += row_csv("scan", row);
    doc["rows"].push_back(row_json(row));
  }
  doc["q_max"] = Json::array();
  for (const auto& g : table.q_max) {
    csv += row_csv("q_max", table.rows[g.row]);
    doc["q_max"].push_back({{"group", g.group},
                            {"row", g.row},
                            {"source", table.rows[g.row].source},
                            {vary_key, g.varied_value},
                            {"qfactor_per_hz", g.qfactor}});
  }

  const std::string json_text = doc.dump(2) + "\n";
  if (c.format == "json") {
    emit(json_text, c.out, out);
  } else {
    emit(csv, c.out, out);
    if (!c.out.empty()) write_atomic(sibling(c.out, ".json"), json_text);
  }

  std::size_t failed = 0;
  for (const auto& row : table.rows) {
    if (row.status != "ok") {
      ++failed;
      err << row.source << ": " << row.status << "\n";
    }
  }
  return failed == table.rows.size() ? kExitCompute : kExitOk;
}

// ---------------------------------------------------------------- config file

std::vector<std::string> with_config(const std::vector<std::string>& args,
                                     const std::set<std::string>& subcommands, std::ostream& err) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].starts_with("--config=")) path = args[i].substr(9);
  }
  if (path.empty()) return args;

  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot open config " + path);
  std::vector<std::string> injected;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::ConfigError,
                  path + ":" + std::to_string(lineno) + ": expected 'key = value'");
    auto trim = [](std::string s) {
      const auto first = s.find_first_not_of(" \t\r");
      if (first == std::string::npos) return std::string();
      return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "config") continue;
    injected.push_back("--" + key + "=" + value);
  }
  (void)err;

  // Config values go right after the subcommand so later flags override.
  std::vector<std::string> merged;
  bool inserted = false;
  for (const auto& a : args) {
    merged.push_back(a);
    if (!inserted && subcommands.count(a)) {
      merged.insert(merged.end(), injected.begin(), injected.end());
      inserted = true;
    }
  }
  if (!inserted) throw Error(ErrorKind::ConfigError, "--config needs a subcommand");
  return merged;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{
      "CPT resonance simulator and scan analysis.\n"
      "All frequencies, rates and detunings are ordinary frequencies in Hz\n"
      "(angular value / 2pi).",
      "cptsim"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);

  Common common;
  ModelOptions model;
  SweepOptions sweep_opts;
  SpinOptions spin_opts;
  std::string strengths = "0.001,0.01,0.1,1,10,100,1000";
  double multiple = kFig1BroadeningMultiple;
  std::vector<std::string> inputs;
  std::string vary_key = kDefaultVaryKey;

  auto* solve = app.add_subcommand("solve", "steady-state populations");
  add_common(solve, common);
  add_model(solve, model, true);

  auto* sw = app.add_subcommand("sweep", "lineshape rho_ee(delta) and resonance metrics");
  add_common(sw, common);
  add_model(sw, model, false);
  sw->add_option("--delta-min-hz", sweep_opts.delta_min_hz, "sweep start, Hz");
  sw->add_option("--delta-max-hz", sweep_opts.delta_max_hz, "sweep end, Hz");
  sw->add_option("--points", sweep_opts.points, "initial grid points")->check(CLI::PositiveNumber);
  sw->add_option("--spacing", sweep_opts.spacing, "linear or adaptive")
      ->check(CLI::IsMember({"linear", "adaptive"}));
  sw->add_option("--span-widths", sweep_opts.span_widths, "default half-span in estimated half widths");
  sw->add_option("--metrics", sweep_opts.metrics, "metrics JSON path");

  auto* cr = app.add_subcommand("contrast-ratio", "physical contrast with and without depolarization");
  add_common(cr, common);
  add_model(cr, model, false);
  cr->add_option("--strengths", strengths, "comma-separated pumping strengths V^2 l_u / Gamma_g");

  auto* pb = app.add_subcommand("power-broadening", "calibrate V to a power-broadening multiple");
  add_common(pb, common);
  add_model(pb, model, false);
  pb->add_option("--multiple", multiple, "excess FWHM over the weak-probe FWHM");

  auto* se = app.add_subcommand("spin-exchange", "spin-exchange broadening vs temperature");
  add_common(se, common);
  se->add_option("--t-min-c", spin_opts.t_min_c, "first temperature, C");
  se->add_option("--t-max-c", spin_opts.t_max_c, "last temperature, C");
  se->add_option("--t-step-c", spin_opts.t_step_c, "temperature step, C");
  se->add_option("--nuclear-spin", spin_opts.nuclear_spin, "I, e.g. 3/2");
  se->add_option("--sigma-se-cm2", spin_opts.sigma_se_cm2, "spin-exchange cross-section, cm^2");
  se->add_option("--atomic-mass-kg", spin_opts.atomic_mass_kg, "atomic mass, kg");
  se->add_option("--vapor-data", spin_opts.vapor_data, "vapor constants file");

  auto* an = app.add_subcommand("analyze", "fit measured transmission scans");
  add_common(an, common);
  an->add_option("inputs", inputs, "scan CSV files or directories")->required();
  an->add_option("--vary-key", vary_key, "metadata key scanned within a Q_max group");

  std::set<std::string> names;
  for (const auto* sub : app.get_subcommands({})) names.insert(sub->get_name());

  try {
    std::vector<std::string> argv = with_config(args, names, err);
    std::reverse(argv.begin(), argv.end());
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (solve->parsed()) return cmd_solve(common, model, out);
    if (sw->parsed()) return cmd_sweep(common, model, sweep_opts, out, err);
    if (cr->parsed()) return cmd_contrast_ratio(common, model, strengths, out);
    if (pb->parsed()) return cmd_power_broadening(common, model, multiple, out);
    if (se->parsed()) return cmd_spin_exchange(common, spin_opts, out);
    if (an->parsed()) return cmd_analyze(common, inputs, vary_key, out, err);
  } catch (const Error& e) {
    const bool config = e.kind() == ErrorKind::ConfigError ||
                        e.kind() == ErrorKind::InvalidArgument ||
                        e.kind() == ErrorKind::InvalidSpin;
    err << (config ? "config error: " : "error: ") << e.what() << "\n";
    return config ? kExitConfig : kExitCompute;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitCompute;
  }
  return kExitConfig;
}

}  // namespace cpt::cli

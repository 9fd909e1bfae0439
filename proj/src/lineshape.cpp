#include "cpt/lineshape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "cpt/error.hpp"
#include "cpt/units.hpp"

namespace cpt {

namespace {

constexpr std::size_t kMinSamplesInWidth = 50;

std::string describe(double delta) {
  std::ostringstream os;
  os.precision(17);
  os << " (at delta_raman = " << delta << " rad/s)";
  return os.str();
}

double interpolate(const std::vector<LineshapeSample>& s, double x) {
  if (x < s.front().delta_raman || x > s.back().delta_raman)
    throw Error(ErrorKind::Unbracketed, "mirror point outside the sweep");
  auto it = std::upper_bound(s.begin(), s.end(), x, [](double v, const LineshapeSample& p) {
    return v < p.delta_raman;
  });
  if (it == s.end()) return s.back().rho_ee;
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double t = (x - lo.delta_raman) / (hi.delta_raman - lo.delta_raman);
  return lo.rho_ee + t * (hi.rho_ee - lo.rho_ee);
}

struct Dip {
  std::size_t min_index;
  double level;  // reference level
  double depth;
  double left;   // half-depth crossings, rad/s
  double right;
};

Dip locate_dip(const Lineshape& shape) {
  const auto& s = shape.samples;
  if (s.size() < 3) throw Error(ErrorKind::NoResonance, "fewer than three samples");
  const double level = shape.reference_level();
  const auto it = std::min_element(s.begin(), s.end(), [](const auto& a, const auto& b) {
    return a.rho_ee < b.rho_ee;
  });
  const std::size_t imin = static_cast<std::size_t>(it - s.begin());
  if (!(it->rho_ee < level - 1e-12))
    throw Error(ErrorKind::NoResonance, "no dip below the reference level");
  if (imin == 0 || imin + 1 == s.size())
    throw Error(ErrorKind::NoResonance, "no interior minimum in the sweep");
  const double half = 0.5 * (level + it->rho_ee);

  std::size_t j = imin;
  while (j > 0 && s[j].rho_ee < half) --j;
  if (s[j].rho_ee < half)
    throw Error(ErrorKind::Unbracketed, "left half-depth crossing outside the sweep");
  const double left = s[j].delta_raman + (half - s[j].rho_ee) / (s[j + 1].rho_ee - s[j].rho_ee) *
                                             (s[j + 1].delta_raman - s[j].delta_raman);

  std::size_t k = imin;
  while (k + 1 < s.size() && s[k].rho_ee < half) ++k;
  if (s[k].rho_ee < half)
    throw Error(ErrorKind::Unbracketed, "right half-depth crossing outside the sweep");
  const double right = s[k - 1].delta_raman + (half - s[k - 1].rho_ee) /
                                                  (s[k].rho_ee - s[k - 1].rho_ee) *
                                                  (s[k].delta_raman - s[k - 1].delta_raman);
  return {imin, level, level - it->rho_ee, left, right};
}

std::vector<double> linear_grid(double lo, double hi, std::size_t n) {
  std::vector<double> g(n);
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) g[i] = lo + step * static_cast<double>(i);
  g.back() = hi;
  return g;
}

std::vector<LineshapeSample> evaluate(const ModelParams& params, const std::vector<double>& grid) {
  std::vector<LineshapeSample> out;
  out.reserve(grid.size());
  for (double d : grid) {
    try {
      out.push_back({d, rho_ee_at(params, d)});
    } catch (const Error& e) {
      throw Error(e.kind(), e.detail() + describe(d));
    }
  }
  return out;
}

}  // namespace

void SweepSpec::validate() const {
  if (!std::isfinite(delta_min) || !std::isfinite(delta_max) || !(delta_min < delta_max))
    throw Error(ErrorKind::InvalidArgument, "sweep requires delta_min < delta_max");
  if (n_points < 3) throw Error(ErrorKind::InvalidArgument, "sweep requires n_points >= 3");
}

double Lineshape::reference_level() const {
  if (baseline) return *baseline;
  if (samples.empty()) return 0.0;
  return 0.5 * (samples.front().rho_ee + samples.back().rho_ee);
}

double rho_ee_at(const ModelParams& params, double delta_raman) {
  return solve_steady_state(params.with_raman(delta_raman)).rho_ee;
}

double estimated_half_width(const ModelParams& params) {
  const LorentzFactors lf = LorentzFactors::from(params);
  const double v2 = params.rabi * params.rabi;
  return params.gamma_g + 0.5 * v2 * (lf.lu + lf.ld / 3.0);
}

double asymptotic_baseline(const ModelParams& params) {
  const double width = std::max(params.gamma_g, params.rabi * params.rabi *
                                                    LorentzFactors::from(params).lu);
  const auto level = [&](double k) {
    return 0.5 * (rho_ee_at(params, k * width) + rho_ee_at(params, -k * width));
  };
  double k = 1e3;
  double previous = level(k);
  while (k <= 1e9) {
    k *= 2.0;
    const double current = level(k);
    if (std::abs(current - previous) <= 1e-6 * std::abs(current)) return current;
    previous = current;
  }
  throw Error(ErrorKind::NonConvergentBaseline, "far-detuned level did not settle by K = 1e9");
}

ContrastResult physical_contrast(const ModelParams& params) {
  ContrastResult r;
  r.baseline = asymptotic_baseline(params);
  r.amplitude = r.baseline - rho_ee_at(params, 0.0);
  r.physical_contrast = r.baseline > 0.0 ? r.amplitude / r.baseline : 0.0;
  return r;
}

SweepSpec default_sweep(const ModelParams& params, std::size_t n_points, Spacing spacing,
                        double span_widths) {
  const double w = span_widths * estimated_half_width(params);
  return {-w, w, n_points, spacing};
}

Lineshape sweep(const ModelParams& params, const SweepSpec& spec) {
  spec.validate();
  params.validate();
  Lineshape shape;
  shape.params = params;
  shape.samples = evaluate(params, linear_grid(spec.delta_min, spec.delta_max, spec.n_points));
  shape.baseline = asymptotic_baseline(params);

  if (spec.spacing == Spacing::Adaptive) {
    for (int pass = 0; pass < 4; ++pass) {
      Dip dip;
      try {
        dip = locate_dip(shape);
      } catch (const Error&) {
        break;  // nothing to refine around
      }
      const auto inside = std::count_if(shape.samples.begin(), shape.samples.end(),
                                        [&](const auto& p) {
                                          return p.delta_raman >= dip.left &&
                                                 p.delta_raman <= dip.right;
                                        });
      if (static_cast<std::size_t>(inside) >= kMinSamplesInWidth) break;
      const double width = dip.right - dip.left;
      const double center = shape.samples[dip.min_index].delta_raman;
      const double lo = std::max(spec.delta_min, center - 0.6 * width);
      const double hi = std::min(spec.delta_max, center + 0.6 * width);
      auto extra = evaluate(params, linear_grid(lo, hi, 2 * kMinSamplesInWidth + 21));
      auto& s = shape.samples;
      s.insert(s.end(), extra.begin(), extra.end());
      std::sort(s.begin(), s.end(),
                [](const auto& a, const auto& b) { return a.delta_raman < b.delta_raman; });
      s.erase(std::unique(s.begin(), s.end(),
                          [](const auto& a, const auto& b) {
                            return a.delta_raman == b.delta_raman;
                          }),
              s.end());
    }
  }
  return shape;
}

double fwhm(const Lineshape& shape) {
  const Dip dip = locate_dip(shape);
  return angular_to_hz(dip.right - dip.left);
}

double resonance_center(const Lineshape& shape) {
  const Dip dip = locate_dip(shape);
  const auto& s = shape.samples;
  const std::size_t i = dip.min_index;
  if (i == 0 || i + 1 == s.size()) return s[i].delta_raman;
  const double x0 = s[i - 1].delta_raman, x1 = s[i].delta_raman, x2 = s[i + 1].delta_raman;
  const double y0 = s[i - 1].rho_ee, y1 = s[i].rho_ee, y2 = s[i + 1].rho_ee;
  const double num = (x1 - x0) * (x1 - x0) * (y1 - y2) - (x1 - x2) * (x1 - x2) * (y1 - y0);
  const double den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
  if (den == 0.0) return x1;
  const double vertex = x1 - 0.5 * num / den;
  return std::clamp(vertex, x0, x2);
}

double asymmetry(const Lineshape& shape) {
  const Dip dip = locate_dip(shape);
  const double center = resonance_center(shape);
  const double half = 0.5 * (dip.right - dip.left);
  constexpr int kSteps = 200;
  double odd = 0.0;
  double norm = 0.0;
  for (int k = 1; k <= kSteps; ++k) {
    const double x = half * static_cast<double>(k) / kSteps;
    const double a = interpolate(shape.samples, center + x);
    const double b = interpolate(shape.samples, center - x);
    odd += (a - b) * (a - b);
    norm += (dip.level - a) * (dip.level - a) + (dip.level - b) * (dip.level - b);
  }
  return norm > 0.0 ? std::sqrt(odd / norm) : 0.0;
}

double symmetry_defect(const Lineshape& shape) {
  const Dip dip = locate_dip(shape);
  const double center = resonance_center(shape);
  const auto& s = shape.samples;
  const double reach = std::min(center - s.front().delta_raman, s.back().delta_raman - center);
  double worst = 0.0;
  for (const auto& p : s) {
    const double x = p.delta_raman - center;
    if (x < 0.0 || x > reach) continue;
    const double a = interpolate(s, center + x);
    const double b = interpolate(s, center - x);
    worst = std::max(worst, std::abs(a - b));
  }
  return worst / dip.depth;
}

ResonanceMetrics lineshape_metrics(const Lineshape& shape) {
  const Dip dip = locate_dip(shape);
  ResonanceMetrics m;
  m.baseline = dip.level;
  m.amplitude = dip.depth;
  m.physical_contrast = dip.level > 0.0 ? dip.depth / dip.level : 0.0;
  m.fwhm_hz = angular_to_hz(dip.right - dip.left);
  m.center_hz = angular_to_hz(resonance_center(shape));
  m.asymmetry = asymmetry(shape);
  m.qfactor = qfactor(m);
  return m;
}

ResonanceMetrics resonance_metrics(const ModelParams& params, const SweepSpec& spec) {
  ResonanceMetrics m = lineshape_metrics(sweep(params, spec));
  const ContrastResult c = physical_contrast(params);
  m.baseline = c.baseline;
  m.amplitude = c.amplitude;
  m.physical_contrast = c.physical_contrast;
  m.qfactor = qfactor(m);
  return m;
}

double model_fwhm(const ModelParams& params) {
  params.validate();
  const double level = asymptotic_baseline(params);
  const double w = estimated_half_width(params);
  const auto rho = [&](double d) { return rho_ee_at(params, d); };

  const auto [center, lowest] =
      boost::math::tools::brent_find_minima(rho, -3.0 * w, 3.0 * w, 40);
  if (!(lowest < level - 1e-12 * std::max(1.0, level)))
    throw Error(ErrorKind::NoResonance, "model shows no dip below its far-detuned level");
  const double half = 0.5 * (level + lowest);
  const auto excess = [&](double d) { return rho(d) - half; };

  const auto crossing = [&](double direction) {
    double inner = center;
    double step = 0.5 * w;
    double outer = center + direction * step;
    int doublings = 0;
    while (excess(outer) < 0.0) {
      inner = outer;
      step *= 2.0;
      outer = center + direction * step;
      if (++doublings > 60)
        throw Error(ErrorKind::Unbracketed, "half-depth crossing not found");
    }
    double a = std::min(inner, outer), b = std::max(inner, outer);
    std::uintmax_t iters = 200;
    const auto [x0, x1] = boost::math::tools::toms748_solve(
        excess, a, b, excess(a), excess(b), boost::math::tools::eps_tolerance<double>(48), iters);
    return 0.5 * (x0 + x1);
  };
  return crossing(1.0) - crossing(-1.0);
}

double calibrate_power_broadening(const ModelParams& params, double multiple) {
  if (!std::isfinite(multiple) || multiple < 0.0)
    throw Error(ErrorKind::InvalidArgument, "broadening multiple must be >= 0");
  params.validate();
  const double v_probe = rabi_for_pumping_strength(params, 1e-3);
  if (multiple == 0.0) return v_probe;

  ModelParams p = params;
  const auto width_at = [&](double v) {
    p.rabi = v;
    return model_fwhm(p);
  };
  const double target = (1.0 + multiple) * width_at(v_probe);
  const double v_top = rabi_for_pumping_strength(params, 1e4);
  if (width_at(v_top) < target)
    throw Error(ErrorKind::NotBracketed, "requested broadening unreachable below V^2 l_u = 1e4 Gamma_g");

  double lo = std::log(v_probe);
  double hi = std::log(v_top);
  while (hi - lo > 1e-7) {
    const double mid = 0.5 * (lo + hi);
    if (width_at(std::exp(mid)) < target)
      lo = mid;
    else
      hi = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

double qfactor(const ResonanceMetrics& metrics) {
  if (!(metrics.fwhm_hz > 0.0))
    throw Error(ErrorKind::InvalidArgument, "Q-factor needs a positive width");
  return metrics.physical_contrast / metrics.fwhm_hz;
}

}  // namespace cpt

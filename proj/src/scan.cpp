#include "cpt/scan.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>
#include <fstream>
#include <numeric>
#include <sstream>

#include "cpt/dense_solve.hpp"
#include "cpt/error.hpp"
#include "cpt/units.hpp"

namespace cpt {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool to_double(std::string_view text, double& out) {
  text = trim(text);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

double median(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    m = 0.5 * (m + lower);
  }
  return m;
}

std::vector<double> moving_average(const std::vector<double>& y, std::size_t half) {
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(y.size() - 1, i + half);
    double acc = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) acc += y[j];
    out[i] = acc / static_cast<double>(hi - lo + 1);
  }
  return out;
}

double sign_of(PeakSign s) { return s == PeakSign::Peak ? 1.0 : -1.0; }

// Free parameters: offset, slope, center offset from reference, half width,
// amplitude.
using Params = Vector<5>;

Params pack(const FitModel& m) {
  return {m.offset, m.slope, m.center_hz - m.reference_hz, m.half_width_hz, m.amplitude};
}

FitModel unpack(const Params& p, const FitModel& like) {
  FitModel m = like;
  m.offset = p[0];
  m.slope = p[1];
  m.center_hz = m.reference_hz + p[2];
  m.half_width_hz = p[3];
  m.amplitude = p[4];
  return m;
}

double sum_squares(const Scan& scan, const FitModel& m) {
  double ssr = 0.0;
  for (std::size_t i = 0; i < scan.size(); ++i) {
    const double r = scan.signal[i] - m.value(scan.frequency_hz[i]);
    ssr += r * r;
  }
  return ssr;
}

double affine_rms(const Scan& scan, double reference) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(scan.size());
  for (std::size_t i = 0; i < scan.size(); ++i) {
    const double x = scan.frequency_hz[i] - reference;
    sx += x;
    sy += scan.signal[i];
    sxx += x * x;
    sxy += x * scan.signal[i];
  }
  const double det = n * sxx - sx * sx;
  const double slope = det != 0.0 ? (n * sxy - sx * sy) / det : 0.0;
  const double offset = (sy - slope * sx) / n;
  double ssr = 0.0;
  for (std::size_t i = 0; i < scan.size(); ++i) {
    const double r = scan.signal[i] - offset - slope * (scan.frequency_hz[i] - reference);
    ssr += r * r;
  }
  return std::sqrt(ssr / n);
}

double median_spacing(const Scan& scan) {
  std::vector<double> d(scan.size() - 1);
  for (std::size_t i = 0; i + 1 < scan.size(); ++i)
    d[i] = scan.frequency_hz[i + 1] - scan.frequency_hz[i];
  return median(std::move(d));
}

std::size_t smoothing_half_window(std::size_t n) { return std::max<std::size_t>(1, n / 200); }

std::optional<double> direct_fwhm(const Scan& scan, const FitModel& m) {
  std::vector<double> d(scan.size());
  const double s = sign_of(m.sign);
  for (std::size_t i = 0; i < scan.size(); ++i)
    d[i] = s * (scan.signal[i] - m.baseline_at(scan.frequency_hz[i]));
  d = moving_average(d, smoothing_half_window(scan.size()));
  const auto top = static_cast<std::size_t>(std::max_element(d.begin(), d.end()) - d.begin());
  const double half = 0.5 * d[top];
  if (!(half > 0.0)) return std::nullopt;
  std::size_t j = top;
  while (j > 0 && d[j] > half) --j;
  std::size_t k = top;
  while (k + 1 < d.size() && d[k] > half) ++k;
  if (d[j] > half || d[k] > half) return std::nullopt;
  const auto& f = scan.frequency_hz;
  const double left = f[j] + (half - d[j]) / (d[j + 1] - d[j]) * (f[j + 1] - f[j]);
  const double right = f[k - 1] + (half - d[k - 1]) / (d[k] - d[k - 1]) * (f[k] - f[k - 1]);
  return right - left;
}

// Antisymmetric part of the residual about the fitted center, relative to
// the fitted line, over one FWHM on either side.
double residual_asymmetry(const Scan& scan, const FitModel& m) {
  const auto& f = scan.frequency_hz;
  std::vector<double> r(scan.size());
  for (std::size_t i = 0; i < scan.size(); ++i) r[i] = scan.signal[i] - m.value(f[i]);
  const auto residual_at = [&](double x) {
    auto it = std::upper_bound(f.begin(), f.end(), x);
    if (it == f.begin() || it == f.end()) return std::optional<double>{};
    const std::size_t hi = static_cast<std::size_t>(it - f.begin());
    const double t = (x - f[hi - 1]) / (f[hi] - f[hi - 1]);
    return std::optional<double>{r[hi - 1] + t * (r[hi] - r[hi - 1])};
  };
  const double window = 2.0 * m.half_width_hz;
  double odd = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < scan.size(); ++i) {
    const double x = f[i] - m.center_hz;
    if (x <= 0.0 || x > window) continue;
    const auto mirror = residual_at(m.center_hz - x);
    if (!mirror) continue;
    const double a = 0.5 * (r[i] - *mirror);
    const double p = m.peak_at(f[i]);
    odd += 2.0 * a * a;
    norm += 2.0 * p * p;
  }
  return norm > 0.0 ? std::sqrt(odd / norm) : 0.0;
}

}  // namespace

void Scan::validate() const {
  if (frequency_hz.size() != signal.size())
    throw Error(ErrorKind::ParseError, source + ": column lengths differ");
  if (size() < kMinScanSamples)
    throw Error(ErrorKind::TooFewSamples, source + ": " + std::to_string(size()) +
                                              " samples, need at least " +
                                              std::to_string(kMinScanSamples));
  for (std::size_t i = 0; i < size(); ++i) {
    if (!std::isfinite(frequency_hz[i]) || !std::isfinite(signal[i]))
      throw Error(ErrorKind::ParseError, source + ": non-finite sample");
    if (i > 0 && !(frequency_hz[i] > frequency_hz[i - 1]))
      throw Error(ErrorKind::MonotonicityError,
                  source + ": frequencies not strictly increasing near " +
                      std::to_string(frequency_hz[i]) + " Hz");
  }
}

Scan load_scan(std::istream& in, const std::string& source) {
  Scan scan;
  scan.source = source;
  std::vector<std::pair<double, double>> rows;
  std::string line;
  int lineno = 0;
  bool seen_data = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view v = trim(line);
    if (lineno == 1 && v.starts_with("\xEF\xBB\xBF")) v = trim(v.substr(3));
    if (v.empty()) continue;
    if (v.front() == '#') {
      const std::string_view body = trim(v.substr(1));
      const auto eq = body.find('=');
      if (eq != std::string_view::npos && eq > 0)
        scan.metadata[std::string(trim(body.substr(0, eq)))] = std::string(trim(body.substr(eq + 1)));
      continue;
    }
    const auto comma = v.find(',');
    const auto where = source + ":" + std::to_string(lineno);
    if (comma == std::string_view::npos || v.find(',', comma + 1) != std::string_view::npos)
      throw Error(ErrorKind::ParseError, where + ": expected two comma-separated columns");
    const auto a = trim(v.substr(0, comma));
    const auto b = trim(v.substr(comma + 1));
    if (!seen_data && a == "frequency_hz" && b == "signal") continue;
    double f = 0.0, s = 0.0;
    if (!to_double(a, f) || !to_double(b, s))
      throw Error(ErrorKind::ParseError, where + ": non-numeric value");
    if (!std::isfinite(f) || !std::isfinite(s))
      throw Error(ErrorKind::ParseError, where + ": non-finite value");
    rows.emplace_back(f, s);
    seen_data = true;
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& x, const auto& y) { return x.first < y.first; });
  for (const auto& [f, s] : rows) {
    scan.frequency_hz.push_back(f);
    scan.signal.push_back(s);
  }
  scan.validate();
  return scan;
}

Scan load_scan(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open " + path);
  return load_scan(in, path);
}

Scan scan_from_lineshape(const Lineshape& shape) {
  Scan scan;
  scan.source = "model";
  for (const auto& s : shape.samples) {
    scan.frequency_hz.push_back(angular_to_hz(s.delta_raman));
    scan.signal.push_back(s.rho_ee);
  }
  return scan;
}

double FitModel::peak_at(double f) const {
  const double u = f - center_hz;
  const double hw2 = half_width_hz * half_width_hz;
  return sign_of(sign) * amplitude * hw2 / (u * u + hw2);
}

FitModel initial_guess(const Scan& scan) {
  scan.validate();
  const auto& f = scan.frequency_hz;
  const std::size_t n = scan.size();
  const std::size_t edge = std::max<std::size_t>(3, n / 10);

  std::vector<double> left(scan.signal.begin(), scan.signal.begin() + static_cast<std::ptrdiff_t>(edge));
  std::vector<double> right(scan.signal.end() - static_cast<std::ptrdiff_t>(edge), scan.signal.end());
  const double f_left = 0.5 * (f[0] + f[edge - 1]);
  const double f_right = 0.5 * (f[n - edge] + f[n - 1]);

  FitModel m;
  m.reference_hz = 0.5 * (f.front() + f.back());
  const double y_left = median(left);
  const double y_right = median(right);
  m.slope = (y_right - y_left) / (f_right - f_left);
  m.offset = y_left + m.slope * (m.reference_hz - f_left);

  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = scan.signal[i] - m.baseline_at(f[i]);
  d = moving_average(d, smoothing_half_window(n));
  const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
  m.sign = *hi >= -*lo ? PeakSign::Peak : PeakSign::Dip;
  const auto top = static_cast<std::size_t>((m.sign == PeakSign::Peak ? hi : lo) - d.begin());
  m.amplitude = std::abs(d[top]);
  m.center_hz = f[top];

  const double half = 0.5 * m.amplitude;
  const double s = sign_of(m.sign);
  std::size_t j = top, k = top;
  while (j > 0 && s * d[j] > half) --j;
  while (k + 1 < n && s * d[k] > half) ++k;
  m.half_width_hz = std::max(0.5 * (f[k] - f[j]), 2.0 * median_spacing(scan));
  return m;
}

FitReport fit_resonance(const Scan& scan) { return fit_resonance(scan, initial_guess(scan)); }

namespace {

struct NormalEquations {
  Matrix<5> jtj{};
  Vector<5> jtr{};
  Vector<5> scale{};
};

NormalEquations normal_equations(const Scan& scan, const FitModel& m) {
  NormalEquations ne;
  const double s = sign_of(m.sign);
  const double hw = m.half_width_hz;
  for (std::size_t i = 0; i < scan.size(); ++i) {
    const double f = scan.frequency_hz[i];
    const double u = f - m.center_hz;
    const double q = u * u + hw * hw;
    const double lor = hw * hw / q;
    const Vector<5> j = {1.0, f - m.reference_hz, s * m.amplitude * 2.0 * u * hw * hw / (q * q),
                         s * m.amplitude * 2.0 * hw * u * u / (q * q), s * lor};
    const double r = scan.signal[i] - m.value(f);
    for (std::size_t a = 0; a < 5; ++a) {
      ne.jtr[a] += j[a] * r;
      for (std::size_t b = 0; b < 5; ++b) ne.jtj[a][b] += j[a] * j[b];
    }
  }
  for (std::size_t d = 0; d < 5; ++d)
    ne.scale[d] = ne.jtj[d][d] > 0.0 ? std::sqrt(ne.jtj[d][d]) : 1.0;
  return ne;
}

// Damped step with columns scaled to unit diagonal; the parameters differ by
// many orders of magnitude.
std::optional<Vector<5>> damped_step(const NormalEquations& ne, double lambda) {
  Matrix<5> a{};
  Vector<5> rhs{};
  for (std::size_t r = 0; r < 5; ++r) {
    for (std::size_t c = 0; c < 5; ++c) a[r][c] = ne.jtj[r][c] / (ne.scale[r] * ne.scale[c]);
    a[r][r] *= 1.0 + lambda;
    rhs[r] = ne.jtr[r] / ne.scale[r];
  }
  Vector<5> step;
  try {
    step = solve_dense(a, rhs);
  } catch (const Error&) {
    return std::nullopt;
  }
  for (std::size_t d = 0; d < 5; ++d) step[d] /= ne.scale[d];
  return step;
}

double step_size(const NormalEquations& ne, const Vector<5>& step) {
  double moved = 0.0;
  for (std::size_t d = 0; d < 5; ++d) moved = std::max(moved, std::abs(step[d]) * ne.scale[d]);
  return moved;
}

FitModel stepped(const FitModel& m, const Vector<5>& step) {
  Params p = pack(m);
  for (std::size_t d = 0; d < 5; ++d) p[d] += step[d];
  return unpack(p, m);
}

}  // namespace

FitReport fit_resonance(const Scan& scan, const FitModel& start) {
  scan.validate();
  const auto& f = scan.frequency_hz;
  const std::size_t n = scan.size();

  FitModel best = start;
  double ssr = sum_squares(scan, best);
  double lambda = 1e-3;
  int iterations = 0;
  bool converged = false;

  while (iterations < 200 && !converged) {
    ++iterations;
    const NormalEquations ne = normal_equations(scan, best);
    bool improved = false;
    while (!improved && lambda < 1e12) {
      auto step = damped_step(ne, lambda);
      if (!step) {
        lambda *= 10.0;
        continue;
      }
      for (int halving = 0; halving < 8 && !improved; ++halving) {
        const FitModel trial = stepped(best, *step);
        if (trial.half_width_hz > 0.0 && trial.amplitude >= 0.0) {
          const double trial_ssr = sum_squares(scan, trial);
          if (trial_ssr < ssr) {
            const double change = (ssr - trial_ssr) / ssr;
            best = trial;
            ssr = trial_ssr;
            improved = true;
            converged = change < 1e-10 || ssr == 0.0;
          }
        }
        for (double& v : *step) v *= 0.5;
      }
      if (improved)
        lambda = std::max(lambda / 10.0, 1e-12);
      else
        lambda *= 10.0;
    }
    // No downhill step at any damping: already at the minimum.
    if (!improved) converged = true;
  }

  // Near the minimum the sum of squares no longer resolves parameter
  // changes; finish with undamped steps on the gradient itself.
  if (converged) {
    const double rms = std::sqrt(ssr / static_cast<double>(n));
    for (int k = 0; k < 6; ++k) {
      const NormalEquations ne = normal_equations(scan, best);
      const auto step = damped_step(ne, 0.0);
      if (!step) break;
      const double moved = step_size(ne, *step);
      if (moved > 1e-3 * rms * std::sqrt(static_cast<double>(n))) break;
      const FitModel trial = stepped(best, *step);
      if (!(trial.half_width_hz > 0.0 && trial.amplitude >= 0.0)) break;
      best = trial;
      ssr = sum_squares(scan, best);
      if (moved < 1e-14 * rms * std::sqrt(static_cast<double>(n))) break;
    }
  }

  FitReport report;
  report.model = best;
  report.iterations = iterations;
  report.converged = converged;
  report.rms_residual = std::sqrt(ssr / static_cast<double>(n));
  report.baseline_rms = affine_rms(scan, best.reference_hz);

  if (!(best.amplitude >= 3.0 * report.rms_residual))
    throw Error(ErrorKind::NoResonance, scan.source + ": fitted amplitude below 3x residual rms");
  if (best.center_hz < f.front() || best.center_hz > f.back() ||
      2.0 * best.half_width_hz < 2.0 * median_spacing(scan))
    throw Error(ErrorKind::NoResonance, scan.source + ": fitted line not resolved within the scan");

  ResonanceMetrics& m = report.metrics;
  m.baseline = best.baseline_at(best.center_hz);
  m.amplitude = best.amplitude;
  const double at_resonance = best.value(best.center_hz);
  m.physical_contrast = at_resonance != 0.0 ? best.amplitude / std::abs(at_resonance) : 0.0;
  m.fwhm_hz = 2.0 * best.half_width_hz;
  m.center_hz = best.center_hz;
  m.asymmetry = residual_asymmetry(scan, best);
  m.qfactor = qfactor(m);
  report.fwhm_direct_hz = direct_fwhm(scan, best);
  return report;
}

std::vector<GroupMaximum> group_maxima(const std::vector<BatchRow>& rows,
                                       const std::string& vary_key) {
  std::map<Metadata, GroupMaximum> groups;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const BatchRow& row = rows[i];
    if (!row.fit || row.status != "ok") continue;
    Metadata key = row.metadata;
    key.erase(vary_key);
    const double q = row.fit->metrics.qfactor;
    auto it = groups.find(key);
    if (it == groups.end() || q > it->second.qfactor) {
      const auto v = row.metadata.find(vary_key);
      groups[key] = {key, i, v == row.metadata.end() ? std::string() : v->second, q};
    }
  }
  std::vector<GroupMaximum> out;
  for (auto& [k, g] : groups) out.push_back(std::move(g));
  return out;
}

namespace {

BatchRow fit_row(const Scan& scan) {
  BatchRow row;
  row.source = scan.source;
  row.metadata = scan.metadata;
  try {
    row.fit = fit_resonance(scan);
    if (!row.fit->converged) row.status = std::string(to_string(ErrorKind::NonConvergence));
  } catch (const Error& e) {
    row.status = std::string(to_string(e.kind()));
  }
  return row;
}

}  // namespace

BatchTable batch_metrics(const std::vector<Scan>& scans, const std::string& vary_key) {
  BatchTable table;
  for (const Scan& scan : scans) table.rows.push_back(fit_row(scan));
  table.q_max = group_maxima(table.rows, vary_key);
  return table;
}

BatchTable analyze_files(const std::vector<std::string>& paths, const std::string& vary_key) {
  BatchTable table;
  for (const std::string& path : paths) {
    try {
      table.rows.push_back(fit_row(load_scan(path)));
    } catch (const Error& e) {
      BatchRow row;
      row.source = path;
      row.status = std::string(to_string(e.kind()));
      table.rows.push_back(std::move(row));
    }
  }
  table.q_max = group_maxima(table.rows, vary_key);
  return table;
}

}  // namespace cpt

#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cpt/lineshape.hpp"

namespace cpt {

using Metadata = std::map<std::string, std::string>;

/// Measured or simulated transmission scan.
struct Scan {
  std::vector<double> frequency_hz;
  std::vector<double> signal;
  Metadata metadata;
  std::string source;

  std::size_t size() const { return frequency_hz.size(); }
  /// At least 16 samples, strictly increasing finite frequencies, finite
  /// signal.
  void validate() const;
};

inline constexpr std::size_t kMinScanSamples = 16;

/// Reads "# key = value" comment metadata followed by "frequency_hz,signal"
/// rows. Rows are sorted by frequency; a repeated frequency is an error.
Scan load_scan(std::istream& in, const std::string& source = "<stream>");
Scan load_scan(const std::string& path);

/// Model lineshape as a scan: frequency = delta/2pi, signal = rho_ee.
Scan scan_from_lineshape(const Lineshape& shape);

enum class PeakSign { Dip, Peak };

/// Affine baseline plus one Lorentzian, frequencies in Hz:
///   offset + slope (f - reference) +/- amplitude hw^2 / ((f - center)^2 + hw^2)
struct FitModel {
  double reference_hz = 0.0;
  double offset = 0.0;
  double slope = 0.0;
  double center_hz = 0.0;
  double half_width_hz = 0.0;
  double amplitude = 0.0;
  PeakSign sign = PeakSign::Peak;

  double baseline_at(double f) const { return offset + slope * (f - reference_hz); }
  double peak_at(double f) const;
  double value(double f) const { return baseline_at(f) + peak_at(f); }
};

struct FitReport {
  FitModel model;
  ResonanceMetrics metrics;
  double rms_residual = 0.0;
  double baseline_rms = 0.0;  // rms of the affine-only least-squares fit
  int iterations = 0;
  bool converged = false;
  std::optional<double> fwhm_direct_hz;  // half-height reading of smoothed data
};

/// Start values: extremum location, half-depth span and edge-median baseline.
FitModel initial_guess(const Scan& scan);

/// Damped Gauss-Newton refinement. Throws NoResonance when the fitted
/// amplitude is below three times the residual rms (or the fitted line is
/// narrower than the sampling or centred off the scan). A fit that runs out
/// of iterations is returned with converged = false.
FitReport fit_resonance(const Scan& scan);
FitReport fit_resonance(const Scan& scan, const FitModel& start);

struct BatchRow {
  std::string source;
  Metadata metadata;
  std::string status = "ok";
  std::optional<FitReport> fit;
};

/// Highest Q-factor within a group of rows sharing all metadata except the
/// varied key.
struct GroupMaximum {
  Metadata group;
  std::size_t row = 0;
  std::string varied_value;
  double qfactor = 0.0;
};

struct BatchTable {
  std::vector<BatchRow> rows;
  std::vector<GroupMaximum> q_max;
};

inline constexpr const char* kDefaultVaryKey = "intensity_mW_cm2";

BatchTable batch_metrics(const std::vector<Scan>& scans,
                         const std::string& vary_key = kDefaultVaryKey);

/// Loads and fits every file; load failures become rows with the error
/// kind as status.
BatchTable analyze_files(const std::vector<std::string>& paths,
                         const std::string& vary_key = kDefaultVaryKey);

std::vector<GroupMaximum> group_maxima(const std::vector<BatchRow>& rows,
                                       const std::string& vary_key);

}  // namespace cpt

#pragma once

// Modulation-transfer error signal: the lower-leg frequency is modulated and
// the upper-leg transmission is demodulated at the modulation frequency.

#include <optional>
#include <string>
#include <vector>

#include "ladder/doppler.hpp"
#include "ladder/parallel.hpp"
#include "ladder/spectra.hpp"
#include "ladder/units.hpp"

namespace ladder {

struct ModulationSpec {
  double f_mod = 3e5;                 // Hz
  double depth = hz_to_rad(1e6);      // rad/s, peak deviation of delta_l
  std::optional<double> demod_phase;  // rad; empty selects the phase of steepest slope
  int samples_per_period = 64;

  void validate() const;
};

struct LockMetrics {
  bool locked = false;         // false when the signal never changes sign
  double zero_crossing = 0.0;  // rad/s
  double slope = 0.0;          // signal per rad/s
  double capture_range = 0.0;  // rad/s
  double low_extremum = 0.0;   // rad/s
  double high_extremum = 0.0;  // rad/s
  bool edge_limited = false;   // an extremum coincides with a scan endpoint
};

struct ErrorSignal {
  std::vector<double> scan_axis;  // delta_u, rad/s
  std::vector<double> values;
  std::vector<double> in_phase;    // phase 0 channel
  std::vector<double> quadrature;  // phase pi/2 channel
  double demod_phase = 0.0;
  LockMetrics metrics;
  std::vector<std::string> warnings;
};

/// Quasi-static demodulation around lower-leg detuning delta_l:
/// e(delta_u) = (2/P) sum_j T_u(delta_l + depth sin th_j, delta_u) sin(th_j + phase).
ErrorSignal error_signal(const UpperLegTransmission& transmission, const ModulationSpec& mod,
                         const ScanSpec& scan, double delta_l, const Parallelism& par = {});

/// Central zero crossing (nearest the scan centre), least-squares slope over
/// +-3 samples, and the extremum-to-extremum capture range around it.
LockMetrics lock_metrics(const std::vector<double>& scan_axis, const std::vector<double>& values);

}  // namespace ladder

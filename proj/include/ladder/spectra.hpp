#pragma once

// Beer-Lambert transmission spectra of both legs, feature extraction and the
// principal-quantum-number benchmark.

#include <optional>
#include <vector>

#include "ladder/atomic_data.hpp"
#include "ladder/doppler.hpp"
#include "ladder/lindblad.hpp"
#include "ladder/parallel.hpp"

namespace ladder {

struct OpticalDepthCalibration {
  double d0_lower = 1.0;       // two-level Doppler-averaged resonant OD
  double d_peak_upper = 1e-2;  // upper-leg OD at the TPAT peak

  void validate() const;
};

struct TransmissionSpectrum {
  std::vector<double> scan_axis;     // rad/s, strictly increasing
  std::vector<double> transmission;  // (0, 1]
  std::vector<double> optical_depth;
  Leg leg = Leg::Lower;      // probed beam
  Leg scanned = Leg::Upper;  // scanned detuning
  LadderSystem params;
  double temperature = 0.0;  // K
  GridPolicy grid;
};

/// T = exp(-D); throws DomainError for D < 0.
double transmission_from_od(double od);

/// Im of the velocity-averaged normalized coherence of `leg` at every point
/// of `scan`. The quadrature grid is rebuilt per point around that point's
/// resonant velocities.
std::vector<double> averaged_absorption(const LadderSystem& sys, const DopplerEnvironment& env,
                                        const ScanSpec& scan, const GridPolicy& policy, Leg leg,
                                        const Parallelism& par = {});

/// Im A_l of the undressed (omega_u = 0) two-level line at delta_l = 0.
double two_level_reference(const LadderSystem& sys, const DopplerEnvironment& env,
                           const GridPolicy& policy);

/// Lower-leg transmission T_l = exp(-d0_lower Im A_l / Im A_l^ref).
TransmissionSpectrum eit_spectrum(const LadderSystem& sys, const DopplerEnvironment& env,
                                  const OpticalDepthCalibration& cal, const ScanSpec& scan,
                                  const GridPolicy& policy, const Parallelism& par = {});

/// Upper-leg transmission T_u = exp(-d_peak_upper Im A_u / max Im A_u) over
/// a scan of delta_u.
TransmissionSpectrum tpat_spectrum(const LadderSystem& sys, const DopplerEnvironment& env,
                                   const OpticalDepthCalibration& cal, const ScanSpec& scan,
                                   const GridPolicy& policy, const Parallelism& par = {});

/// Upper-leg transmission with its OD scale frozen by a calibration scan, so
/// it can be evaluated at arbitrary (delta_l, delta_u).
class UpperLegTransmission {
 public:
  UpperLegTransmission(const LadderSystem& sys, const DopplerEnvironment& env,
                       const OpticalDepthCalibration& cal, const ScanSpec& calibration_scan,
                       const GridPolicy& policy, const Parallelism& par = {});

  double operator()(double delta_l, double delta_u) const;

  double od_per_absorption() const { return od_per_absorption_; }
  const LadderSystem& system() const { return sys_; }

 private:
  LadderSystem sys_;
  DopplerEnvironment env_;
  GridPolicy policy_;
  double od_per_absorption_;
};

enum class FeatureMode { Eit, Tpat };

/// Samples with detuning <= low_edge or >= high_edge form the off-resonant
/// baseline; the feature is searched strictly between them.
struct BaselineWindow {
  double low_edge;
  double high_edge;

  /// Outer `fraction` of the scan on each side.
  static BaselineWindow outer_fraction(const TransmissionSpectrum& spec, double fraction);
};

struct FeatureMetrics {
  bool resolved = false;
  double baseline = 1.0;          // mean off-resonant transmission
  double depth = 0.0;             // |T_feature - baseline|
  double feature_detuning = 0.0;  // rad/s
  std::optional<double> fwhm;     // rad/s
  std::optional<double> at_splitting;  // rad/s, TPAT doublet only
  double contrast = 0.0;
};

/// TPAT contrast: dip normalized to the off-resonant transmission.
/// EIT contrast: change normalized to the single-photon transmission loss.
FeatureMetrics feature_metrics(const TransmissionSpectrum& spec, FeatureMode mode,
                               const BaselineWindow& baseline, double noise_floor = 1e-12);

struct ScanNRow {
  int n;
  double eit_amplitude;
  double tpat_amplitude;
};

struct ScanNSetup {
  AtomSpec atom;
  LadderSystem eit_base;   // rates at n_ref
  LadderSystem tpat_base;  // rates at n_ref
  ScanSpec eit_scan;
  ScanSpec tpat_scan;
  OpticalDepthCalibration cal;
  GridPolicy policy;
  double baseline_fraction = 0.1;
};

struct ScanNResult {
  std::vector<ScanNRow> rows;
  std::vector<TransmissionSpectrum> eit_spectra;
  std::vector<TransmissionSpectrum> tpat_spectra;
};

/// EIT and TPAT amplitudes per principal quantum number. Omega_u and Gamma_u
/// follow the atom's scaling laws; the upper-leg OD scale is frozen at n_ref
/// and carried to other n in proportion to the transition strength
/// (Omega_u(n) / Omega_u(n_ref))^2.
ScanNResult scan_n(const std::vector<int>& ns, const ScanNSetup& setup,
                   const DopplerEnvironment& env, const Parallelism& par = {});

}  // namespace ladder

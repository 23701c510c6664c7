#pragma once

// Run configuration: INI-style `key = value` file with sections. All rates
// are written in ordinary frequency (Hz); the factor 2 pi is applied here
// when reading and undone when writing.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ladder/atomic_data.hpp"
#include "ladder/doppler.hpp"
#include "ladder/lindblad.hpp"
#include "ladder/lockin.hpp"
#include "ladder/spectra.hpp"

namespace ladder {

struct ScanNConfig {
  std::vector<int> n_values{30, 40, 54, 60, 80};
  double eit_omega_l = hz_to_rad(40e3);
  double eit_omega_u = hz_to_rad(1.2e6);  // at n_ref
  double tpat_omega_l = hz_to_rad(4.8e6);
  double tpat_omega_u = hz_to_rad(36e3);  // at n_ref
  ScanSpec eit_scan{Leg::Upper, hz_to_rad(-10e6), hz_to_rad(10e6), 201};
  ScanSpec tpat_scan{Leg::Upper, hz_to_rad(-20e6), hz_to_rad(20e6), 201};
  bool write_spectra = false;
};

struct RunConfig {
  AtomSpec atom = rb87_ladder();

  int n = 30;
  double delta_l = 0.0;
  double delta_u = 0.0;
  double omega_l = hz_to_rad(4.8e6);
  double omega_u_ref = hz_to_rad(36e3);  // at atom.n_ref, scaled to n
  double dephasing_ge = 0.0;
  double dephasing_gr = 0.0;

  double temperature = celsius_to_kelvin(89.0);
  OpticalDepthCalibration calibration;
  GridPolicy grid;
  ScanSpec scan{Leg::Upper, hz_to_rad(-20e6), hz_to_rad(20e6), 401};

  FeatureMode mode = FeatureMode::Tpat;
  double baseline_fraction = 0.1;
  double noise_floor = 1e-12;

  Leg map_leg = Leg::Upper;
  double map_v_min = -20.0;
  double map_v_max = 20.0;
  int map_v_points = 0;  // 0: Doppler quadrature grid

  ModulationSpec modulation;
  std::vector<double> omega_l_sweep;  // rad/s

  ScanNConfig scan_n;

  std::string fit_data;
  std::string fit_model = "od";
  std::vector<double> fit_init;

  unsigned threads = 0;
  bool plot = false;
  std::filesystem::path out_dir = "out";

  LadderSystem ladder() const;
  DopplerEnvironment environment() const;

  /// Throws InputError naming the first invalid field.
  void validate() const;
};

/// Parses "89 C", "89 degC", "362.15 K" into kelvin.
double parse_temperature(const std::string& text);

/// Defaults, overlaid by the file (if any), overlaid by `section.key=value`
/// overrides in order. Unknown keys are rejected.
RunConfig load_config(const std::optional<std::filesystem::path>& file,
                      const std::vector<std::string>& overrides);

/// `key = value` lines echoing every physical parameter (rates in Hz).
std::string describe(const RunConfig& config);

}  // namespace ladder

#pragma once

// Physical constants, the Rb-87 ladder parameters and principal quantum
// number scaling laws for nS Rydberg states.

namespace ladder {

struct AtomSpec {
  double mass;              // kg
  double lower_wavelength;  // m
  double upper_wavelength;  // m
  double gamma_lower;       // rad/s, intermediate-state decay
  double gamma_upper_ref;   // rad/s, Rydberg decay at n_ref
  int n_ref;
  double quantum_defect;

  /// Throws DomainError on non-physical values.
  void validate() const;

  /// Lower-leg wavelength shorter than the upper-leg wavelength.
  bool inverted() const { return lower_wavelength < upper_wavelength; }

  double k_lower() const;
  double k_upper() const;

  /// Effective principal quantum number n* = n - quantum_defect.
  double effective_principal(int n) const;

  /// Rydberg decay rate anchored at n_ref, scaled as (n*_ref / n*)^3.
  double scale_gamma_upper(int n) const;

  /// Upper-leg Rabi frequency at n given its value omega_ref at n_ref,
  /// scaled as (n*_ref / n*)^(3/2).
  double scale_omega_upper(int n, double omega_ref) const;
};

inline constexpr int kMinPrincipal = 5;
inline constexpr double kRb87Mass = 86.909180527;  // u
inline constexpr double kRbNsQuantumDefect = 3.131;

/// 87Rb 5S1/2 -> 6P3/2 -> nS1/2 ladder anchored at n = 30.
AtomSpec rb87_ladder();

/// Temperature of the vapour and the derived 1D rms thermal speed.
class DopplerEnvironment {
 public:
  /// temperature in kelvin; throws DomainError when temperature <= 0.
  DopplerEnvironment(double temperature, const AtomSpec& atom);

  /// Environment whose thermal speed equals sigma_v (used for cold limits).
  static DopplerEnvironment with_sigma(double sigma_v, const AtomSpec& atom);

  double temperature() const { return temperature_; }
  double sigma_v() const { return sigma_v_; }

 private:
  double temperature_;
  double sigma_v_;
};

/// sqrt(k_B T / m) in m/s.
double doppler_sigma(double temperature, const AtomSpec& atom);

}  // namespace ladder

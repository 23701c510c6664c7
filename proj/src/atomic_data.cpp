#include "ladder/atomic_data.hpp"

#include <cmath>
#include <string>

#include "ladder/units.hpp"

namespace ladder {

void AtomSpec::validate() const {
  if (!(mass > 0.0)) throw DomainError("atom.mass must be > 0");
  if (!(lower_wavelength > 0.0)) throw DomainError("atom.lower_wavelength must be > 0");
  if (!(upper_wavelength > 0.0)) throw DomainError("atom.upper_wavelength must be > 0");
  if (!(gamma_lower >= 0.0)) throw DomainError("atom.gamma_lower must be >= 0");
  if (!(gamma_upper_ref >= 0.0)) throw DomainError("atom.gamma_upper_ref must be >= 0");
  if (n_ref < kMinPrincipal) throw DomainError("atom.n_ref must be >= 5");
  if (!(static_cast<double>(n_ref) - quantum_defect > 0.0)) {
    throw DomainError("atom.quantum_defect must leave n_ref* > 0");
  }
}

double AtomSpec::k_lower() const { return kTwoPi / lower_wavelength; }
double AtomSpec::k_upper() const { return kTwoPi / upper_wavelength; }

double AtomSpec::effective_principal(int n) const {
  if (n < kMinPrincipal) {
    throw DomainError("principal quantum number " + std::to_string(n) + " below minimum 5");
  }
  const double n_star = static_cast<double>(n) - quantum_defect;
  if (!(n_star > 0.0)) throw DomainError("effective principal quantum number must be > 0");
  return n_star;
}

double AtomSpec::scale_gamma_upper(int n) const {
  if (n == n_ref) return gamma_upper_ref;
  const double ratio = effective_principal(n_ref) / effective_principal(n);
  return gamma_upper_ref * ratio * ratio * ratio;
}

double AtomSpec::scale_omega_upper(int n, double omega_ref) const {
  if (!(omega_ref >= 0.0)) throw DomainError("omega_ref must be >= 0");
  if (n == n_ref) {
    effective_principal(n);
    return omega_ref;
  }
  const double ratio = effective_principal(n_ref) / effective_principal(n);
  return omega_ref * std::pow(ratio, 1.5);
}

AtomSpec rb87_ladder() {
  return AtomSpec{
      .mass = kRb87Mass * kAtomicMassUnit,
      .lower_wavelength = 420e-9,
      .upper_wavelength = 1020e-9,
      .gamma_lower = hz_to_rad(1.4e6),
      .gamma_upper_ref = hz_to_rad(11e3),
      .n_ref = 30,
      .quantum_defect = kRbNsQuantumDefect,
  };
}

double doppler_sigma(double temperature, const AtomSpec& atom) {
  if (!(temperature > 0.0)) throw DomainError("temperature must be > 0 K");
  if (!(atom.mass > 0.0)) throw DomainError("atom.mass must be > 0");
  return std::sqrt(kBoltzmann * temperature / atom.mass);
}

DopplerEnvironment::DopplerEnvironment(double temperature, const AtomSpec& atom)
    : temperature_(temperature), sigma_v_(doppler_sigma(temperature, atom)) {}

DopplerEnvironment DopplerEnvironment::with_sigma(double sigma_v, const AtomSpec& atom) {
  if (!(sigma_v > 0.0)) throw DomainError("sigma_v must be > 0");
  return DopplerEnvironment(atom.mass * sigma_v * sigma_v / kBoltzmann, atom);
}

}  // namespace ladder

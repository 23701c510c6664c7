#pragma once

#include <numbers>
#include <stdexcept>
#include <string>

namespace ladder {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kBoltzmann = 1.380649e-23;        // J/K
inline constexpr double kAtomicMassUnit = 1.66053906660e-27;  // kg
inline constexpr double kZeroCelsius = 273.15;             // K

/// Ordinary frequency (Hz) to angular frequency (rad/s).
constexpr double hz_to_rad(double hz) { return kTwoPi * hz; }
/// Angular frequency (rad/s) to ordinary frequency (Hz).
constexpr double rad_to_hz(double rad) { return rad / kTwoPi; }

constexpr double celsius_to_kelvin(double c) { return c + kZeroCelsius; }

/// Raised when an argument lies outside the domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when the Lindblad generator has no unique stationary state.
class NoSteadyStateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by spectrum pipelines when a calibration reference vanishes.
class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ladder

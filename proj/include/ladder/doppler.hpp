#pragma once

// Velocity-space quadrature over the 1D Maxwell-Boltzmann distribution with
// refinement windows at the resonant velocity classes.

#include <array>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ladder/atomic_data.hpp"
#include "ladder/lindblad.hpp"
#include "ladder/parallel.hpp"

namespace ladder {

/// Truncation of the velocity distribution in units of sigma_v.
inline constexpr double kVelocityCutoff = 4.5;

enum class Leg { Lower, Upper };

struct Window {
  double center;      // m/s
  double half_width;  // m/s
};

/// Quadrature nodes (strictly increasing) and weights (Maxwell-Boltzmann
/// density folded in, summing to 1).
struct VelocityGrid {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<Window> refinement_windows;
};

struct GridPolicy {
  int base_points = 1024;
  int window_points = 512;

  void validate() const;
};

/// (v1, v2, v12): lower one-photon, upper one-photon and two-photon resonant
/// velocities. v12 is NaN when k_l == k_u (velocity-independent two-photon
/// resonance).
std::array<double, 3> resonant_velocities(const LadderSystem& sys);

/// Velocities where a weak probe on either leg meets a light-shifted
/// (dressed) resonance of the other leg. These host the narrowest features.
std::vector<double> dressed_resonant_velocities(const LadderSystem& sys);

VelocityGrid build_grid(const DopplerEnvironment& env, const LadderSystem& sys, int base_points,
                        int window_points);

inline VelocityGrid build_grid(const DopplerEnvironment& env, const LadderSystem& sys,
                               const GridPolicy& policy) {
  return build_grid(env, sys, policy.base_points, policy.window_points);
}

/// Weighted sum of the normalized coherence of one leg,
/// sum_i w_i rho(v_i) / (Omega / 2). Throws DomainError when that leg's Rabi
/// frequency is zero; steady-state failures are rethrown with the velocity.
cplx average_coherence(const LadderSystem& sys, const VelocityGrid& grid, Leg leg);

/// Both legs from a single pass over the grid; requires omega_l, omega_u > 0.
std::pair<cplx, cplx> average_coherences(const LadderSystem& sys, const VelocityGrid& grid);

struct ScanSpec {
  Leg axis = Leg::Upper;  // which detuning is scanned
  double start = 0.0;     // rad/s
  double stop = 0.0;      // rad/s
  int points = 2;

  void validate() const;
  /// Strictly increasing axis; symmetric ranges give exactly mirrored values.
  std::vector<double> values() const;
};

/// sys with the scanned detuning set to value.
LadderSystem with_detuning(const LadderSystem& sys, Leg axis, double value);

struct AbsorptionMap {
  std::vector<double> scan_axis;      // rad/s
  std::vector<double> velocity_axis;  // m/s
  Eigen::MatrixXd values;             // (velocity, scan): Im rho / (Omega / 2)
};

AbsorptionMap absorption_map(const LadderSystem& sys, const ScanSpec& scan,
                             std::span<const double> velocities, Leg leg,
                             const Parallelism& par = {});

/// Uniform display axis of `points` velocities in [v_min, v_max].
std::vector<double> uniform_velocities(double v_min, double v_max, int points);

}  // namespace ladder

#pragma once

// Three-level ladder |g> -> |e> -> |r> in the rotating frame. Atoms moving
// with axial velocity v see the lower beam at delta_l - k_l v and the
// counter-propagating upper beam at delta_u + k_u v.

#include <cmath>
#include <complex>
#include <utility>

#include <Eigen/Dense>

#include "ladder/atomic_data.hpp"

namespace ladder {

using cplx = std::complex<double>;

struct LadderSystem {
  double delta_l = 0.0;  // rad/s
  double delta_u = 0.0;  // rad/s
  double omega_l = 0.0;  // rad/s
  double omega_u = 0.0;  // rad/s
  double gamma_l = 0.0;  // rad/s, |e> -> |g>
  double gamma_u = 0.0;  // rad/s, |r> -> |e>
  double k_l = 1.0;      // rad/m
  double k_u = 1.0;      // rad/m
  double extra_dephasing_ge = 0.0;  // rad/s
  double extra_dephasing_gr = 0.0;  // rad/s

  /// Throws DomainError naming the first invalid field.
  void validate() const;

  /// Same system with detunings replaced by their values in the frame of an
  /// atom moving at v.
  LadderSystem doppler_shifted(double v) const;

  double gamma_ge() const { return 0.5 * gamma_l + extra_dephasing_ge; }
  double gamma_gr() const { return 0.5 * gamma_u + extra_dephasing_gr; }
  /// The extra dephasings act through one diagonal jump operator
  /// diag(0, sqrt(2 x_ge), sqrt(2 x_gr)), which keeps the evolution completely
  /// positive and leaves rho_er the residual (sqrt(x_ge) - sqrt(x_gr))^2.
  double gamma_er() const {
    const double d = std::sqrt(extra_dephasing_ge) - std::sqrt(extra_dephasing_gr);
    return 0.5 * (gamma_l + gamma_u) + d * d;
  }

  /// Ladder for principal quantum number n: gamma_u and omega_u are scaled
  /// from their n_ref values with the atom's scaling laws.
  static LadderSystem from_atom(const AtomSpec& atom, int n, double delta_l, double delta_u,
                                double omega_l, double omega_u_ref);
};

/// 3x3 Hermitian unit-trace density matrix over (|g>, |e>, |r>).
using DensityMatrix = Eigen::Matrix3cd;

/// Vectorized generator acting on row-major vec(rho) (index 3*i + j).
using Generator = Eigen::Matrix<cplx, 9, 9>;

Generator build_generator(const LadderSystem& sys, double v);

/// Stationary state of the master equation for velocity class v.
/// Throws NoSteadyStateError when the stationary state is not unique or the
/// solve is too ill-conditioned to meet the residual bound.
DensityMatrix steady_state(const LadderSystem& sys, double v);

/// Weak-probe linear response of the lower leg, rho_ge / (Omega_l / 2).
cplx weak_probe_chi_lower(const LadderSystem& sys, double v);

struct Coherences {
  cplx ge;  // lower-leg absorption ~ Im(ge) / Omega_l
  cplx er;  // upper-leg absorption ~ Im(er) / Omega_u
};

/// rho(g,e) and rho(e,r); positive imaginary parts mean absorption.
Coherences coherences(const DensityMatrix& rho);

}  // namespace ladder

#include "ladder/lindblad.hpp"

#include <cmath>
#include <sstream>

#include "ladder/units.hpp"

namespace ladder {

namespace {

void require_rate(double value, const char* name) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw DomainError(std::string("ladder.") + name + " must be finite and >= 0");
  }
}

using Mat3 = Eigen::Matrix3cd;

}  // namespace

void LadderSystem::validate() const {
  if (!std::isfinite(delta_l)) throw DomainError("ladder.delta_l must be finite");
  if (!std::isfinite(delta_u)) throw DomainError("ladder.delta_u must be finite");
  require_rate(omega_l, "omega_l");
  require_rate(omega_u, "omega_u");
  require_rate(gamma_l, "gamma_l");
  require_rate(gamma_u, "gamma_u");
  require_rate(extra_dephasing_ge, "extra_dephasing_ge");
  require_rate(extra_dephasing_gr, "extra_dephasing_gr");
  if (!(k_l > 0.0) || !std::isfinite(k_l)) throw DomainError("ladder.k_l must be > 0");
  if (!(k_u > 0.0) || !std::isfinite(k_u)) throw DomainError("ladder.k_u must be > 0");
}

LadderSystem LadderSystem::doppler_shifted(double v) const {
  LadderSystem shifted = *this;
  shifted.delta_l = delta_l - k_l * v;
  shifted.delta_u = delta_u + k_u * v;
  return shifted;
}

LadderSystem LadderSystem::from_atom(const AtomSpec& atom, int n, double delta_l, double delta_u,
                                     double omega_l, double omega_u_ref) {
  atom.validate();
  LadderSystem sys;
  sys.delta_l = delta_l;
  sys.delta_u = delta_u;
  sys.omega_l = omega_l;
  sys.omega_u = atom.scale_omega_upper(n, omega_u_ref);
  sys.gamma_l = atom.gamma_lower;
  sys.gamma_u = atom.scale_gamma_upper(n);
  sys.k_l = atom.k_lower();
  sys.k_u = atom.k_upper();
  return sys;
}

Generator build_generator(const LadderSystem& sys, double v) {
  const LadderSystem s = sys.doppler_shifted(v);
  const double dl = s.delta_l;
  const double d2 = s.delta_l + s.delta_u;

  Mat3 h = Mat3::Zero();
  h(1, 1) = -dl;
  h(2, 2) = -d2;
  h(0, 1) = h(1, 0) = 0.5 * s.omega_l;
  h(1, 2) = h(2, 1) = 0.5 * s.omega_u;

  Mat3 jump_l = Mat3::Zero();
  jump_l(0, 1) = std::sqrt(s.gamma_l);
  Mat3 jump_u = Mat3::Zero();
  jump_u(1, 2) = std::sqrt(s.gamma_u);
  Mat3 dephasing = Mat3::Zero();
  dephasing(1, 1) = std::sqrt(2.0 * s.extra_dephasing_ge);
  dephasing(2, 2) = std::sqrt(2.0 * s.extra_dephasing_gr);

  const Mat3 id = Mat3::Identity();
  // Row-major vec: vec(A rho B) = kron(A, B^T) vec(rho).
  auto kron = [](const Mat3& a, const Mat3& b) {
    Generator out;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
          for (int l = 0; l < 3; ++l) out(3 * i + k, 3 * j + l) = a(i, j) * b(k, l);
    return out;
  };

  const cplx i_unit(0.0, 1.0);
  Generator gen = -i_unit * kron(h, id) + i_unit * kron(id, h.transpose());
  for (const Mat3* c : {&jump_l, &jump_u, &dephasing}) {
    const Mat3 cdc = c->adjoint() * *c;
    gen += kron(*c, c->conjugate());
    gen -= 0.5 * kron(cdc, id);
    gen -= 0.5 * kron(id, cdc.transpose());
  }
  return gen;
}

DensityMatrix steady_state(const LadderSystem& sys, double v) {
  sys.validate();
  if (!(sys.gamma_l > 0.0) && !(sys.gamma_u > 0.0)) {
    throw NoSteadyStateError("no unique steady state: all decay rates are zero");
  }
  const LadderSystem s = sys.doppler_shifted(v);
  const double a = 0.5 * s.omega_l;
  const double b = 0.5 * s.omega_u;
  const double d1 = s.delta_l;
  const double d2 = s.delta_l + s.delta_u;
  const double du = s.delta_u;
  const double g1 = s.gamma_ge();
  const double g2 = s.gamma_gr();
  const double g3 = s.gamma_er();

  // Real Bloch form with rho_gg eliminated through the trace:
  // x = (rho_ee, rho_rr, Re/Im rho_ge, Re/Im rho_gr, Re/Im rho_er).
  using Mat8 = Eigen::Matrix<double, 8, 8>;
  using Vec8 = Eigen::Matrix<double, 8, 1>;
  Mat8 m;
  // clang-format off
  m << -s.gamma_l, s.gamma_u, 0,   2*a, 0,   0,   0,   -2*b,
        0,        -s.gamma_u, 0,   0,   0,   0,   0,    2*b,
        0,         0,        -g1,  d1,  0,  -b,   0,    0,
       -2*a,      -a,        -d1, -g1,  b,   0,   0,    0,
        0,         0,         0,  -b,  -g2,  d2,  0,    a,
        0,         0,         b,   0,  -d2, -g2, -a,    0,
        0,         0,         0,   0,   0,   a,  -g3,   du,
        b,        -b,         0,   0,  -a,   0,  -du,  -g3;
  // clang-format on
  Vec8 rhs = Vec8::Zero();
  rhs(3) = -a;

  // Power-of-two scaling keeps the scaled system exact.
  int exponent = 0;
  std::frexp(m.cwiseAbs().maxCoeff(), &exponent);
  m = (m.array() * std::ldexp(1.0, -exponent)).matrix();
  rhs = (rhs.array() * std::ldexp(1.0, -exponent)).matrix();

  Eigen::FullPivLU<Mat8> lu(m);
  lu.setThreshold(1e-13);
  if (!lu.isInvertible()) {
    std::ostringstream msg;
    msg << "no unique steady state (generator rank " << lu.rank() << " < 8)";
    throw NoSteadyStateError(msg.str());
  }
  Vec8 x = lu.solve(rhs);
  // Iterative refinement with an extended-precision residual recovers
  // accuracy lost to conditioning when rates span many decades.
  for (int pass = 0; pass < 2; ++pass) {
    Vec8 r;
    for (int i = 0; i < 8; ++i) {
      long double acc = rhs(i);
      for (int j = 0; j < 8; ++j) acc -= static_cast<long double>(m(i, j)) * x(j);
      r(i) = static_cast<double>(acc);
    }
    x += lu.solve(r);
  }
  const double residual = (m * x - rhs).cwiseAbs().maxCoeff();
  if (!(residual <= 1e-10) || !x.allFinite()) {
    std::ostringstream msg;
    msg << "steady state residual " << residual << " exceeds 1e-10 of generator norm";
    throw NoSteadyStateError(msg.str());
  }

  DensityMatrix rho;
  rho(1, 1) = x(0);
  rho(2, 2) = x(1);
  rho(0, 0) = 1.0 - x(0) - x(1);
  rho(0, 1) = cplx(x(2), x(3));
  rho(0, 2) = cplx(x(4), x(5));
  rho(1, 2) = cplx(x(6), x(7));
  rho(1, 0) = std::conj(rho(0, 1));
  rho(2, 0) = std::conj(rho(0, 2));
  rho(2, 1) = std::conj(rho(1, 2));
  return rho;
}

cplx weak_probe_chi_lower(const LadderSystem& sys, double v) {
  const LadderSystem s = sys.doppler_shifted(v);
  const cplx i_unit(0.0, 1.0);
  const cplx one_photon = s.gamma_ge() + i_unit * s.delta_l;
  const double coupling = 0.25 * s.omega_u * s.omega_u;
  if (coupling == 0.0) return i_unit / one_photon;
  // Multiplied through by the two-photon denominator so an undamped dark
  // resonance gives exactly zero instead of 0/0.
  const cplx two_photon = s.gamma_gr() + i_unit * (s.delta_l + s.delta_u);
  return i_unit * two_photon / (one_photon * two_photon + coupling);
}

Coherences coherences(const DensityMatrix& rho) { return {rho(0, 1), rho(1, 2)}; }

}  // namespace ladder

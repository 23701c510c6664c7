#include "ladder/noisefit.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ladder/units.hpp"

namespace ladder {

double predict_od_noise(double od, const NoiseModelOD& m) {
  if (!(od >= 0.0)) throw DomainError("optical depth must be >= 0");
  const double atoms = m.a * std::sqrt(od) * std::exp(-m.b * od);
  return std::hypot(atoms, m.c);
}

double predict_waist_noise(double waist, const NoiseModelWaist& m) {
  if (!(waist > 0.0)) throw DomainError("beam waist must be > 0");
  return std::hypot(m.a / waist, m.b);
}

double synth_atom_noise(double od, double n_atoms) {
  if (!(od >= 0.0)) throw DomainError("optical depth must be >= 0");
  if (!(n_atoms >= 1.0)) throw DomainError("atom number must be >= 1");
  return std::exp(-od) * od / std::sqrt(n_atoms);
}

std::size_t parameter_count(NoiseModelKind kind) {
  return kind == NoiseModelKind::OpticalDepth ? 3 : 2;
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double sign_of(double v) { return v < 0.0 ? -1.0 : 1.0; }

// Model values and Jacobian with respect to the raw (signed) parameters; the
// model itself sees |p|.
void evaluate(NoiseModelKind kind, const DataSeries& data, const VectorXd& p, VectorXd& f,
              MatrixXd& jac) {
  const Eigen::Index m = static_cast<Eigen::Index>(data.x.size());
  f.resize(m);
  jac.resize(m, p.size());
  constexpr double tiny = std::numeric_limits<double>::min();
  for (Eigen::Index i = 0; i < m; ++i) {
    const double x = data.x[static_cast<std::size_t>(i)];
    if (kind == NoiseModelKind::OpticalDepth) {
      const double a = std::abs(p(0)), b = std::abs(p(1)), c = std::abs(p(2));
      const double shape = std::sqrt(x) * std::exp(-b * x);
      const double s = a * shape;
      const double v = std::hypot(s, c);
      const double inv = 1.0 / std::max(v, tiny);
      f(i) = v;
      jac(i, 0) = s * shape * inv * sign_of(p(0));
      jac(i, 1) = -x * s * s * inv * sign_of(p(1));
      jac(i, 2) = c * inv * sign_of(p(2));
    } else {
      const double a = std::abs(p(0)), b = std::abs(p(1));
      const double v = std::hypot(a / x, b);
      const double inv = 1.0 / std::max(v, tiny);
      f(i) = v;
      jac(i, 0) = a / (x * x) * inv * sign_of(p(0));
      jac(i, 1) = b * inv * sign_of(p(1));
    }
  }
}

void validate_data(NoiseModelKind kind, const DataSeries& data, const std::vector<double>& initial) {
  const std::size_t np = parameter_count(kind);
  if (initial.size() != np) {
    throw DomainError("expected " + std::to_string(np) + " initial parameters, got " +
                      std::to_string(initial.size()));
  }
  if (data.x.size() != data.y.size()) throw DomainError("x and y columns differ in length");
  if (data.x.size() < 2 * np) {
    throw DomainError("fit needs at least " + std::to_string(2 * np) + " points, got " +
                      std::to_string(data.x.size()));
  }
  for (std::size_t i = 0; i < data.x.size(); ++i) {
    if (!std::isfinite(data.x[i]) || !std::isfinite(data.y[i])) throw DomainError("data must be finite");
    if (kind == NoiseModelKind::OpticalDepth && data.x[i] < 0.0) throw DomainError("optical depth must be >= 0");
    if (kind == NoiseModelKind::Waist && !(data.x[i] > 0.0)) throw DomainError("beam waist must be > 0");
  }
  for (double v : initial) {
    if (!std::isfinite(v) || v < 0.0) throw DomainError("initial parameters must be finite and >= 0");
  }
}

}  // namespace

FitResult fit(NoiseModelKind kind, const DataSeries& data, const std::vector<double>& initial,
              const FitOptions& options) {
  validate_data(kind, data, initial);
  const Eigen::Index np = static_cast<Eigen::Index>(initial.size());
  const Eigen::Index m = static_cast<Eigen::Index>(data.x.size());
  const VectorXd y = Eigen::Map<const VectorXd>(data.y.data(), m);

  VectorXd p = Eigen::Map<const VectorXd>(initial.data(), np);
  VectorXd f;
  MatrixXd jac;
  evaluate(kind, data, p, f, jac);
  VectorXd r = y - f;
  double cost = 0.5 * r.squaredNorm();
  double lambda = 1e-3;

  FitResult out;
  for (out.iterations = 0; out.iterations < options.max_iterations; ++out.iterations) {
    const VectorXd grad = jac.transpose() * r;
    if (grad.norm() < 1e-10 * (1.0 + cost)) {
      out.converged = true;
      break;
    }
    const MatrixXd jtj = jac.transpose() * jac;
    VectorXd damping = jtj.diagonal();
    const double floor = std::max(1e-12 * damping.maxCoeff(), std::numeric_limits<double>::min());
    damping = damping.cwiseMax(floor);

    bool stop = false;
    while (true) {
      MatrixXd lhs = jtj;
      lhs.diagonal() += lambda * damping;
      const VectorXd step = lhs.ldlt().solve(grad);
      const bool tiny_step = step.norm() < 1e-12 * (1.0 + p.norm());
      const VectorXd trial = p + step;
      VectorXd f_trial;
      MatrixXd jac_trial;
      evaluate(kind, data, trial, f_trial, jac_trial);
      const VectorXd r_trial = y - f_trial;
      const double cost_trial = 0.5 * r_trial.squaredNorm();
      if (step.allFinite() && cost_trial < cost) {
        p = trial;
        f = f_trial;
        jac = jac_trial;
        r = r_trial;
        cost = cost_trial;
        lambda = std::max(lambda * 0.3, 1e-15);
        stop = tiny_step;
        break;
      }
      if (tiny_step || lambda > 1e20) {
        stop = true;
        break;
      }
      lambda *= 4.0;
    }
    if (stop) {
      out.converged = true;
      ++out.iterations;
      break;
    }
  }

  out.params.resize(static_cast<std::size_t>(np));
  for (Eigen::Index k = 0; k < np; ++k) out.params[static_cast<std::size_t>(k)] = std::abs(p(k));
  out.residual_norm = r.norm();

  // Covariance in the reported (non-negative) parameters.
  MatrixXd jac_abs = jac;
  for (Eigen::Index k = 0; k < np; ++k) jac_abs.col(k) *= sign_of(p(k));
  const double dof = static_cast<double>(m - np);
  const double variance = 2.0 * cost / dof;
  const MatrixXd info = jac_abs.transpose() * jac_abs;
  Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(info);
  MatrixXd cov = variance * cod.pseudoInverse();
  out.covariance = 0.5 * (cov + cov.transpose());
  return out;
}

SnrResult snr(double signal_amplitude, double background_rms, double detector_rms, SnrMode mode) {
  if (!std::isfinite(signal_amplitude) || signal_amplitude < 0.0) {
    throw DomainError("signal amplitude must be finite and >= 0");
  }
  if (!(background_rms > 0.0)) throw DomainError("background rms must be > 0");
  if (!(detector_rms >= 0.0)) throw DomainError("detector rms must be >= 0");
  SnrResult out;
  if (mode == SnrMode::Raw) {
    out.value = signal_amplitude / background_rms;
    return out;
  }
  if (background_rms <= detector_rms) {
    out.noise_floor_limited = true;
    out.value = signal_amplitude == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return out;
  }
  out.value = signal_amplitude /
              std::sqrt((background_rms - detector_rms) * (background_rms + detector_rms));
  return out;
}

}  // namespace ladder

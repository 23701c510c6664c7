#pragma once

// Atom-number noise models, a damped least-squares fitter for them, and
// signal-to-noise figures.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace ladder {

/// Transmission noise versus optical depth:
/// dT = sqrt((a sqrt(D) exp(-b D))^2 + c^2).
struct NoiseModelOD {
  double a = 0.0;  // V
  double b = 0.0;
  double c = 0.0;  // V, technical floor
};

/// rms noise versus 1/e^2 beam waist: V = sqrt(a^2 / w^2 + b^2).
struct NoiseModelWaist {
  double a = 0.0;  // V m
  double b = 0.0;  // V
};

double predict_od_noise(double od, const NoiseModelOD& model);
double predict_waist_noise(double waist, const NoiseModelWaist& model);

/// Poisson atom-number noise through Beer-Lambert: e^-D * D / sqrt(N).
double synth_atom_noise(double od, double n_atoms);

enum class NoiseModelKind { OpticalDepth, Waist };

struct DataSeries {
  std::vector<double> x;
  std::vector<double> y;
};

struct FitOptions {
  int max_iterations = 200;
};

struct FitResult {
  std::vector<double> params;  // non-negative, model order (a, b, c) or (a, b)
  Eigen::MatrixXd covariance;
  double residual_norm = 0.0;  // sqrt(sum of squared residuals)
  int iterations = 0;
  bool converged = false;
};

std::size_t parameter_count(NoiseModelKind kind);

/// Levenberg-Marquardt minimization of sum (y_i - f(x_i; |p|))^2.
/// Requires at least twice as many points as parameters.
FitResult fit(NoiseModelKind kind, const DataSeries& data, const std::vector<double>& initial,
              const FitOptions& options = {});

enum class SnrMode { Raw, Ideal };

struct SnrResult {
  double value = 0.0;
  /// Ideal mode with background <= detector noise: the value is +infinity.
  bool noise_floor_limited = false;
};

/// raw = A / background; ideal = A / sqrt(background^2 - detector^2).
SnrResult snr(double signal_amplitude, double background_rms, double detector_rms, SnrMode mode);

}  // namespace ladder

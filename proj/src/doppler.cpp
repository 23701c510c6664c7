#include "ladder/doppler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "ladder/units.hpp"

namespace ladder {

namespace {

// Roots of a v^2 + b v + c = 0, degrading gracefully to the linear case.
void real_roots(double a, double b, double c, std::vector<double>& out) {
  const double scale = std::max({std::abs(a), std::abs(b), std::abs(c)});
  if (scale == 0.0) return;
  if (std::abs(a) <= 1e-14 * std::max(std::abs(b), std::abs(c))) {
    if (b != 0.0) out.push_back(-c / b);
    return;
  }
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return;
  const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
  if (q != 0.0) {
    out.push_back(q / a);
    out.push_back(c / q);
  } else {
    out.push_back(0.0);
  }
}

// t_j in [-1, 1] with t_{n-1-j} == -t_j exactly.
double symmetric_fraction(int j, int n) {
  return static_cast<double>(2 * j - (n - 1)) / static_cast<double>(n - 1);
}

void append_window(double center, double half_width, int points, double limit,
                   std::vector<double>& nodes) {
  if (!std::isfinite(center) || center - half_width > limit || center + half_width < -limit) {
    return;
  }
  for (int j = 0; j < points; ++j) {
    const double v = center + half_width * symmetric_fraction(j, points);
    if (v >= -limit && v <= limit) nodes.push_back(v);
  }
}

double normal_density(double v, double sigma) {
  const double z = v / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

cplx leg_coherence(const DensityMatrix& rho, Leg leg) {
  const Coherences c = coherences(rho);
  return leg == Leg::Lower ? c.ge : c.er;
}

DensityMatrix annotated_steady_state(const LadderSystem& sys, double v) {
  try {
    return steady_state(sys, v);
  } catch (const NoSteadyStateError& e) {
    std::ostringstream msg;
    msg << e.what() << " at velocity node v = " << v << " m/s";
    throw NoSteadyStateError(msg.str());
  }
}

}  // namespace

void GridPolicy::validate() const {
  if (base_points < 64) throw DomainError("grid.base_points must be >= 64");
  if (window_points < 16) throw DomainError("grid.window_points must be >= 16");
}

std::array<double, 3> resonant_velocities(const LadderSystem& sys) {
  if (!(sys.k_l > 0.0) || !(sys.k_u > 0.0)) throw DomainError("wavevectors must be > 0");
  const double dk = sys.k_l - sys.k_u;
  const double v12 = dk == 0.0 ? std::numeric_limits<double>::quiet_NaN()
                               : (sys.delta_l + sys.delta_u) / dk;
  return {sys.delta_l / sys.k_l, -sys.delta_u / sys.k_u, v12};
}

std::vector<double> dressed_resonant_velocities(const LadderSystem& sys) {
  const double dk = sys.k_l - sys.k_u;
  const double sum = sys.delta_l + sys.delta_u;
  std::vector<double> roots;
  // Weak lower probe, upper leg dressing: d_l'(d_l' + d_u') = Omega_u^2 / 4.
  real_roots(sys.k_l * dk, -(sys.delta_l * dk + sys.k_l * sum),
             sys.delta_l * sum - 0.25 * sys.omega_u * sys.omega_u, roots);
  // Weak upper probe, lower leg dressing: d_u'(d_l' + d_u') = Omega_l^2 / 4.
  real_roots(-sys.k_u * dk, sys.k_u * sum - sys.delta_u * dk,
             sys.delta_u * sum - 0.25 * sys.omega_l * sys.omega_l, roots);
  std::sort(roots.begin(), roots.end());
  return roots;
}

VelocityGrid build_grid(const DopplerEnvironment& env, const LadderSystem& sys, int base_points,
                        int window_points) {
  GridPolicy{base_points, window_points}.validate();
  sys.validate();
  const double sigma = env.sigma_v();
  if (!(sigma > 0.0)) throw DomainError("sigma_v must be > 0");
  const double limit = kVelocityCutoff * sigma;
  const double spacing = 2.0 * limit / (base_points - 1);

  std::vector<double> nodes;
  nodes.reserve(base_points + 3 * window_points + 16 * window_points);
  for (int j = 0; j < base_points; ++j) nodes.push_back(limit * symmetric_fraction(j, base_points));

  VelocityGrid grid;
  const double half_width =
      std::max(5.0 * (sys.gamma_l + sys.omega_l + sys.omega_u) / sys.k_l, spacing);
  // Without upper-leg coupling nothing depends on delta_u, so only the
  // lower-leg resonance is refined and the grid is independent of delta_u.
  const bool coupled = sys.omega_u > 0.0;
  const auto resonances = resonant_velocities(sys);
  for (std::size_t r = 0; r < resonances.size(); ++r) {
    const double c = resonances[r];
    if (!std::isfinite(c) || (!coupled && r > 0)) continue;
    grid.refinement_windows.push_back({c, half_width});
    append_window(c, half_width, window_points, limit, nodes);
  }

  // Nested windows at the dressed resonances, shrinking by 8x per level until
  // the two-photon linewidth (mapped to velocity) is resolved.
  const double dk = std::abs(sys.k_l - sys.k_u);
  const double narrow_rate = sys.gamma_u + 2.0 * sys.extra_dephasing_gr;
  const double narrow_width =
      dk > 0.0 && narrow_rate > 0.0 ? narrow_rate / dk : 0.0;
  const int fine_points = std::max(16, window_points / 2);
  const std::vector<double> dressed =
      coupled ? dressed_resonant_velocities(sys) : std::vector<double>{};
  for (double c : dressed) {
    double w = half_width;
    for (int level = 0; level < 6; ++level) {
      w /= 8.0;
      if (w < 4.0 * narrow_width && level > 0) break;
      grid.refinement_windows.push_back({c, w});
      append_window(c, w, fine_points, limit, nodes);
    }
  }

  std::sort(nodes.begin(), nodes.end());
  const double tol = 1e-12 * limit;
  std::vector<double> merged;
  merged.reserve(nodes.size());
  for (double v : nodes) {
    if (merged.empty() || v - merged.back() > tol) merged.push_back(v);
  }

  const std::size_t n = merged.size();
  std::vector<double> weights(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double left = i > 0 ? merged[i] - merged[i - 1] : 0.0;
    const double right = i + 1 < n ? merged[i + 1] - merged[i] : 0.0;
    weights[i] = 0.5 * (left + right) * normal_density(merged[i], sigma);
    total += weights[i];
  }
  // The +-4.5 sigma tails (6.8e-6 of the mass) are folded back in.
  for (double& w : weights) w /= total;
  // Rounding may leave the ascending-order sum a few ulps above 1.
  for (int pass = 0; pass < 8; ++pass) {
    double sum = 0.0;
    for (double w : weights) sum += w;
    if (sum <= 1.0) break;
    for (double& w : weights) w *= 1.0 - std::numeric_limits<double>::epsilon();
  }

  grid.nodes = std::move(merged);
  grid.weights = std::move(weights);
  return grid;
}

cplx average_coherence(const LadderSystem& sys, const VelocityGrid& grid, Leg leg) {
  const double omega = leg == Leg::Lower ? sys.omega_l : sys.omega_u;
  if (!(omega > 0.0)) {
    throw DomainError(leg == Leg::Lower ? "lower-leg average needs omega_l > 0"
                                        : "upper-leg average needs omega_u > 0");
  }
  cplx acc = 0.0;
  for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
    acc += grid.weights[i] * leg_coherence(annotated_steady_state(sys, grid.nodes[i]), leg);
  }
  return acc / (0.5 * omega);
}

std::pair<cplx, cplx> average_coherences(const LadderSystem& sys, const VelocityGrid& grid) {
  if (!(sys.omega_l > 0.0) || !(sys.omega_u > 0.0)) {
    throw DomainError("averaging both legs needs omega_l > 0 and omega_u > 0");
  }
  cplx lower = 0.0;
  cplx upper = 0.0;
  for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
    const Coherences c = coherences(annotated_steady_state(sys, grid.nodes[i]));
    lower += grid.weights[i] * c.ge;
    upper += grid.weights[i] * c.er;
  }
  return {lower / (0.5 * sys.omega_l), upper / (0.5 * sys.omega_u)};
}

void ScanSpec::validate() const {
  if (!std::isfinite(start) || !std::isfinite(stop)) throw DomainError("scan range must be finite");
  if (points < 2) throw DomainError("scan.points must be >= 2");
  if (!(stop > start)) throw DomainError("scan range is empty (stop must exceed start)");
}

std::vector<double> ScanSpec::values() const {
  validate();
  const double mid = 0.5 * (start + stop);
  const double half = 0.5 * (stop - start);
  std::vector<double> out(points);
  for (int j = 0; j < points; ++j) out[j] = mid + half * symmetric_fraction(j, points);
  return out;
}

LadderSystem with_detuning(const LadderSystem& sys, Leg axis, double value) {
  LadderSystem out = sys;
  (axis == Leg::Lower ? out.delta_l : out.delta_u) = value;
  return out;
}

std::vector<double> uniform_velocities(double v_min, double v_max, int points) {
  if (points < 2 || !(v_max > v_min)) throw DomainError("velocity axis needs v_max > v_min and >= 2 points");
  const double mid = 0.5 * (v_min + v_max);
  const double half = 0.5 * (v_max - v_min);
  std::vector<double> out(points);
  for (int j = 0; j < points; ++j) out[j] = mid + half * symmetric_fraction(j, points);
  return out;
}

AbsorptionMap absorption_map(const LadderSystem& sys, const ScanSpec& scan,
                             std::span<const double> velocities, Leg leg, const Parallelism& par) {
  sys.validate();
  AbsorptionMap map;
  map.scan_axis = scan.values();
  map.velocity_axis.assign(velocities.begin(), velocities.end());
  map.values.resize(static_cast<Eigen::Index>(velocities.size()),
                    static_cast<Eigen::Index>(map.scan_axis.size()));
  const double omega = leg == Leg::Lower ? sys.omega_l : sys.omega_u;
  // A leg without drive has no coherence; its normalized response is zero.
  const double norm = omega > 0.0 ? 0.5 * omega : 0.0;
  parallel_for(map.scan_axis.size(), par, [&](std::size_t j) {
    const LadderSystem point = with_detuning(sys, scan.axis, map.scan_axis[j]);
    for (std::size_t i = 0; i < velocities.size(); ++i) {
      const double value =
          norm > 0.0 ? leg_coherence(annotated_steady_state(point, velocities[i]), leg).imag() / norm
                     : 0.0;
      map.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = value;
    }
  });
  return map;
}

}  // namespace ladder

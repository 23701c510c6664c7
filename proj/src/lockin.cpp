#include "ladder/lockin.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ladder/units.hpp"

namespace ladder {

void ModulationSpec::validate() const {
  if (!(f_mod > 0.0) || !std::isfinite(f_mod)) throw DomainError("modulation.f_mod must be > 0");
  if (!(depth >= 0.0) || !std::isfinite(depth)) throw DomainError("modulation.depth must be >= 0");
  if (samples_per_period < 8 || samples_per_period % 2 != 0) {
    throw DomainError("modulation.samples_per_period must be even and >= 8");
  }
  if (demod_phase && !std::isfinite(*demod_phase)) throw DomainError("modulation.demod_phase must be finite");
}

ErrorSignal error_signal(const UpperLegTransmission& transmission, const ModulationSpec& mod,
                         const ScanSpec& scan, double delta_l, const Parallelism& par) {
  mod.validate();
  if (scan.axis != Leg::Upper) throw DomainError("error signals scan the upper-leg detuning");

  ErrorSignal out;
  out.scan_axis = scan.values();
  const std::size_t n = out.scan_axis.size();
  out.in_phase.assign(n, 0.0);
  out.quadrature.assign(n, 0.0);

  const double linewidth_hz = rad_to_hz(transmission.system().gamma_l);
  if (mod.f_mod > 0.25 * linewidth_hz) {
    std::ostringstream msg;
    msg << "f_mod = " << mod.f_mod << " Hz is not small against the intermediate linewidth "
        << linewidth_hz << " Hz; the quasi-static demodulation model is approximate";
    out.warnings.push_back(msg.str());
  }

  // Phase th_j = 2 pi j / P. Samples j and j + P/2 see opposite detuning
  // offsets and opposite reference signs, so each pair contributes
  // [T(+) - T(-)] * ref_j. sin(th_j) is taken from the folded index so that
  // j and P/2 - j share bit-identical offsets.
  const int p = mod.samples_per_period;
  const int half = p / 2;
  const int distinct = half / 2 + 1;
  std::vector<double> offset(distinct);
  for (int m = 0; m < distinct; ++m) {
    offset[m] = mod.depth * std::sin(2.0 * std::numbers::pi * m / p);
  }

  if (mod.depth > 0.0) {
    parallel_for(n, par, [&](std::size_t i) {
      const double du = out.scan_axis[i];
      std::vector<double> diff(distinct, 0.0);
      for (int m = 1; m < distinct; ++m) {
        diff[m] = transmission(delta_l + offset[m], du) - transmission(delta_l - offset[m], du);
      }
      double in_phase = 0.0;
      double quadrature = 0.0;
      for (int j = 0; j < half; ++j) {
        const int m = std::min(j, half - j);
        const double theta = 2.0 * std::numbers::pi * j / p;
        in_phase += diff[m] * std::sin(theta);
        quadrature += diff[m] * std::cos(theta);
      }
      out.in_phase[i] = 2.0 * in_phase / p;
      out.quadrature[i] = 2.0 * quadrature / p;
    });
  }

  if (mod.demod_phase) {
    out.demod_phase = *mod.demod_phase;
  } else {
    const LockMetrics mi = lock_metrics(out.scan_axis, out.in_phase);
    const LockMetrics mq = lock_metrics(out.scan_axis, out.quadrature);
    const double si = mi.locked ? mi.slope : 0.0;
    const double sq = mq.locked ? mq.slope : 0.0;
    out.demod_phase = (si == 0.0 && sq == 0.0) ? 0.0 : std::atan2(sq, si);
  }
  const double c = std::cos(out.demod_phase);
  const double s = std::sin(out.demod_phase);
  out.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.values[i] = c * out.in_phase[i] + s * out.quadrature[i];
  out.metrics = lock_metrics(out.scan_axis, out.values);
  return out;
}

LockMetrics lock_metrics(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("error signal needs matching axes of >= 2 samples");
  LockMetrics out;
  const std::size_t n = x.size();
  const double centre = 0.5 * (x.front() + x.back());

  // Candidate crossings: exact zeros (index k, k) or sign changes (k, k + 1).
  bool found = false;
  std::size_t lo = 0, hi = 0;
  double best_distance = 0.0;
  double best_position = 0.0;
  auto consider = [&](std::size_t a, std::size_t b, double position) {
    const double distance = std::abs(position - centre);
    if (!found || distance < best_distance ||
        (distance == best_distance && std::abs(position) < std::abs(best_position))) {
      found = true;
      lo = a;
      hi = b;
      best_distance = distance;
      best_position = position;
    }
  };
  // Values within round-off of zero count as exact zeros, so a crossing that
  // lands on a sample is classified the same way regardless of its last bits.
  double scale = 0.0;
  for (double v : y) scale = std::max(scale, std::abs(v));
  const double tiny = 1e-12 * scale;
  auto is_zero = [&](std::size_t k) { return std::abs(y[k]) <= tiny; };
  for (std::size_t k = 0; k < n; ++k) {
    const bool zero = is_zero(k);
    const bool isolated = zero && ((k > 0 && !is_zero(k - 1)) || (k + 1 < n && !is_zero(k + 1)));
    if (zero && isolated) consider(k, k, x[k]);
    if (k + 1 < n && !zero && !is_zero(k + 1) && (y[k] < 0.0) != (y[k + 1] < 0.0)) {
      const double f = y[k] / (y[k] - y[k + 1]);
      consider(k, k + 1, x[k] + f * (x[k + 1] - x[k]));
    }
  }
  if (!found) return out;
  out.locked = true;
  out.zero_crossing = best_position;

  // Least-squares slope over three samples on either side of the crossing.
  const std::size_t first = lo >= 2 ? (lo == hi ? lo - std::min<std::size_t>(lo, 3) : lo - 2) : 0;
  const std::size_t last = std::min(n - 1, hi + (lo == hi ? 3 : 2));
  double mx = 0.0, my = 0.0;
  const double count = static_cast<double>(last - first + 1);
  for (std::size_t k = first; k <= last; ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= count;
  my /= count;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = first; k <= last; ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
  }
  out.slope = sxx > 0.0 ? sxy / sxx : 0.0;

  // Walk outwards while the signal keeps moving away from zero.
  const double dir = out.slope >= 0.0 ? 1.0 : -1.0;
  std::size_t right = hi;
  while (right + 1 < n && dir * (y[right + 1] - y[right]) > 0.0) ++right;
  std::size_t left = lo;
  while (left > 0 && dir * (y[left] - y[left - 1]) > 0.0) --left;
  out.low_extremum = x[left];
  out.high_extremum = x[right];
  out.capture_range = std::abs(x[right] - x[left]);
  out.edge_limited = left == 0 || right == n - 1;
  return out;
}

}  // namespace ladder

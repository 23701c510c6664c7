#include "ladder/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ladder/units.hpp"

namespace ladder {

namespace {

double averaged_absorption_at(const LadderSystem& point, const DopplerEnvironment& env,
                              const GridPolicy& policy, Leg leg) {
  return average_coherence(point, build_grid(env, point, policy), leg).imag();
}

TransmissionSpectrum make_spectrum(const LadderSystem& sys, const DopplerEnvironment& env,
                                   const GridPolicy& policy, const ScanSpec& scan, Leg leg,
                                   std::vector<double> od) {
  TransmissionSpectrum spec;
  spec.scan_axis = scan.values();
  spec.optical_depth = std::move(od);
  spec.transmission.resize(spec.optical_depth.size());
  for (std::size_t i = 0; i < spec.optical_depth.size(); ++i) {
    spec.transmission[i] = transmission_from_od(spec.optical_depth[i]);
  }
  spec.leg = leg;
  spec.scanned = scan.axis;
  spec.params = sys;
  spec.temperature = env.temperature();
  spec.grid = policy;
  return spec;
}

double max_value(const std::vector<double>& values) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : values) m = std::max(m, v);
  return m;
}

// Clamps tiny negative round-off of an absorption ratio to zero.
double non_negative_od(double od) {
  if (od < 0.0 && od > -1e-12) return 0.0;
  return od;
}

// Linear interpolation of the detuning where t crosses `level` between i and j.
double crossing(const TransmissionSpectrum& s, std::size_t i, std::size_t j, double level) {
  const double ti = s.transmission[i];
  const double tj = s.transmission[j];
  if (tj == ti) return s.scan_axis[j];
  const double f = (level - ti) / (tj - ti);
  return s.scan_axis[i] + f * (s.scan_axis[j] - s.scan_axis[i]);
}

// Vertex of the parabola through three equally spaced samples.
double refine_extremum(const TransmissionSpectrum& s, std::size_t i) {
  if (i == 0 || i + 1 >= s.scan_axis.size()) return s.scan_axis[i];
  const double y0 = s.transmission[i - 1];
  const double y1 = s.transmission[i];
  const double y2 = s.transmission[i + 1];
  const double curvature = y0 - 2.0 * y1 + y2;
  if (curvature == 0.0) return s.scan_axis[i];
  const double offset = 0.5 * (y0 - y2) / curvature;
  const double step = 0.5 * (s.scan_axis[i + 1] - s.scan_axis[i - 1]);
  return s.scan_axis[i] + std::clamp(offset, -0.5, 0.5) * step;
}

// True when candidate a should be preferred over b: larger deviation first,
// then smaller |detuning|.
bool prefer(double dev_a, double det_a, double dev_b, double det_b) {
  if (dev_a != dev_b) return dev_a > dev_b;
  return std::abs(det_a) < std::abs(det_b);
}

}  // namespace

void OpticalDepthCalibration::validate() const {
  if (!(d0_lower >= 0.0) || !std::isfinite(d0_lower)) throw DomainError("calibration.d0_lower must be >= 0");
  if (!(d_peak_upper >= 0.0) || !std::isfinite(d_peak_upper)) {
    throw DomainError("calibration.d_peak_upper must be >= 0");
  }
}

double transmission_from_od(double od) {
  if (!(od >= 0.0)) throw DomainError("optical depth must be >= 0");
  return std::exp(-od);
}

std::vector<double> averaged_absorption(const LadderSystem& sys, const DopplerEnvironment& env,
                                        const ScanSpec& scan, const GridPolicy& policy, Leg leg,
                                        const Parallelism& par) {
  sys.validate();
  policy.validate();
  const std::vector<double> axis = scan.values();
  std::vector<double> out(axis.size());
  parallel_for(axis.size(), par, [&](std::size_t i) {
    out[i] = averaged_absorption_at(with_detuning(sys, scan.axis, axis[i]), env, policy, leg);
  });
  return out;
}

double two_level_reference(const LadderSystem& sys, const DopplerEnvironment& env,
                           const GridPolicy& policy) {
  LadderSystem ref = sys;
  ref.omega_u = 0.0;
  ref.delta_l = 0.0;
  return averaged_absorption_at(ref, env, policy, Leg::Lower);
}

TransmissionSpectrum eit_spectrum(const LadderSystem& sys, const DopplerEnvironment& env,
                                  const OpticalDepthCalibration& cal, const ScanSpec& scan,
                                  const GridPolicy& policy, const Parallelism& par) {
  cal.validate();
  const double ref = two_level_reference(sys, env, policy);
  if (!(ref > 0.0)) throw CalibrationError("two-level reference absorption is zero");
  std::vector<double> od = averaged_absorption(sys, env, scan, policy, Leg::Lower, par);
  for (double& d : od) d = non_negative_od(cal.d0_lower * (d / ref));
  return make_spectrum(sys, env, policy, scan, Leg::Lower, std::move(od));
}

TransmissionSpectrum tpat_spectrum(const LadderSystem& sys, const DopplerEnvironment& env,
                                   const OpticalDepthCalibration& cal, const ScanSpec& scan,
                                   const GridPolicy& policy, const Parallelism& par) {
  cal.validate();
  if (scan.axis != Leg::Upper) throw DomainError("TPAT spectra scan the upper-leg detuning");
  std::vector<double> od = averaged_absorption(sys, env, scan, policy, Leg::Upper, par);
  const double peak = max_value(od);
  if (!(peak > 0.0)) throw CalibrationError("upper-leg absorption vanishes over the scan");
  for (double& d : od) d = non_negative_od(cal.d_peak_upper * (d / peak));
  return make_spectrum(sys, env, policy, scan, Leg::Upper, std::move(od));
}

UpperLegTransmission::UpperLegTransmission(const LadderSystem& sys, const DopplerEnvironment& env,
                                           const OpticalDepthCalibration& cal,
                                           const ScanSpec& calibration_scan,
                                           const GridPolicy& policy, const Parallelism& par)
    : sys_(sys), env_(env), policy_(policy), od_per_absorption_(0.0) {
  cal.validate();
  if (calibration_scan.axis != Leg::Upper) {
    throw DomainError("upper-leg calibration scans the upper-leg detuning");
  }
  const double peak =
      max_value(averaged_absorption(sys, env, calibration_scan, policy, Leg::Upper, par));
  if (!(peak > 0.0)) throw CalibrationError("upper-leg absorption vanishes over the scan");
  od_per_absorption_ = cal.d_peak_upper / peak;
}

double UpperLegTransmission::operator()(double delta_l, double delta_u) const {
  LadderSystem point = sys_;
  point.delta_l = delta_l;
  point.delta_u = delta_u;
  const double od = od_per_absorption_ * averaged_absorption_at(point, env_, policy_, Leg::Upper);
  return transmission_from_od(non_negative_od(od));
}

BaselineWindow BaselineWindow::outer_fraction(const TransmissionSpectrum& spec, double fraction) {
  if (spec.scan_axis.size() < 2) throw DomainError("spectrum needs at least two samples");
  if (!(fraction > 0.0 && fraction < 0.5)) throw DomainError("baseline fraction must be in (0, 0.5)");
  const double lo = spec.scan_axis.front();
  const double hi = spec.scan_axis.back();
  const double span = hi - lo;
  return {lo + fraction * span, hi - fraction * span};
}

FeatureMetrics feature_metrics(const TransmissionSpectrum& spec, FeatureMode mode,
                               const BaselineWindow& baseline, double noise_floor) {
  const auto& x = spec.scan_axis;
  const auto& t = spec.transmission;
  if (x.size() != t.size() || x.size() < 3) throw DomainError("spectrum needs at least three samples");
  if (!(baseline.low_edge < baseline.high_edge)) throw DomainError("baseline window overlaps itself");

  double sum = 0.0;
  std::size_t count = 0;
  std::size_t first = x.size();
  std::size_t last = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] <= baseline.low_edge || x[i] >= baseline.high_edge) {
      sum += t[i];
      ++count;
    } else {
      first = std::min(first, i);
      last = std::max(last, i);
    }
  }
  if (count == 0) throw DomainError("baseline window contains no samples");
  if (first > last) throw DomainError("baseline window leaves no feature region");

  FeatureMetrics out;
  out.baseline = sum / static_cast<double>(count);

  // Extremum: deepest dip for TPAT, largest |deviation| for EIT.
  std::size_t best = first;
  double best_dev = -1.0;
  for (std::size_t i = first; i <= last; ++i) {
    const double dev = mode == FeatureMode::Tpat ? out.baseline - t[i] : std::abs(t[i] - out.baseline);
    if (prefer(dev, x[i], best_dev, x[best])) {
      best_dev = dev;
      best = i;
    }
  }
  if (!(best_dev > noise_floor)) return out;

  out.resolved = true;
  out.depth = best_dev;
  out.feature_detuning = x[best];
  if (mode == FeatureMode::Tpat) {
    out.contrast = out.baseline > 0.0 ? out.depth / out.baseline : 0.0;
  } else {
    const double loss = 1.0 - out.baseline;
    out.contrast = loss > 0.0 ? out.depth / loss : 0.0;
  }

  const double half = out.baseline + 0.5 * (t[best] - out.baseline);
  const bool above = t[best] > out.baseline;
  auto past_half = [&](std::size_t i) { return above ? t[i] <= half : t[i] >= half; };
  std::optional<double> left, right;
  for (std::size_t i = best; i > 0; --i) {
    if (past_half(i - 1)) {
      left = crossing(spec, i - 1, i, half);
      break;
    }
  }
  for (std::size_t i = best; i + 1 < x.size(); ++i) {
    if (past_half(i + 1)) {
      right = crossing(spec, i, i + 1, half);
      break;
    }
  }
  if (left && right) out.fwhm = *right - *left;

  if (mode == FeatureMode::Tpat) {
    struct Minimum {
      double dev;
      double detuning;
      std::size_t index;
    };
    std::vector<Minimum> minima;
    for (std::size_t i = std::max<std::size_t>(first, 1); i <= last && i + 1 < x.size(); ++i) {
      const bool is_min = t[i] < t[i - 1] && t[i] <= t[i + 1];
      // A plateau counts once, at its sample nearest zero detuning.
      const bool plateau_dup = t[i] == t[i + 1] && std::abs(x[i + 1]) < std::abs(x[i]);
      const double dev = out.baseline - t[i];
      if (is_min && !plateau_dup && dev > noise_floor) minima.push_back({dev, x[i], i});
    }
    std::sort(minima.begin(), minima.end(), [](const Minimum& a, const Minimum& b) {
      return prefer(a.dev, a.detuning, b.dev, b.detuning);
    });
    if (minima.size() >= 2) {
      out.at_splitting =
          std::abs(refine_extremum(spec, minima[0].index) - refine_extremum(spec, minima[1].index));
    }
  }
  return out;
}

ScanNResult scan_n(const std::vector<int>& ns, const ScanNSetup& setup, const DopplerEnvironment& env,
                   const Parallelism& par) {
  const AtomSpec& atom = setup.atom;
  atom.validate();
  for (int n : ns) {
    if (n < 10 || n > 120) throw DomainError("scan-n values must lie in [10, 120]");
  }

  auto at_n = [&](const LadderSystem& base, int n) {
    LadderSystem sys = base;
    sys.omega_u = atom.scale_omega_upper(n, base.omega_u);
    sys.gamma_u = atom.scale_gamma_upper(n);
    return sys;
  };

  // Upper-leg OD scale frozen at n_ref.
  const LadderSystem tpat_ref = at_n(setup.tpat_base, atom.n_ref);
  const std::vector<double> ref_abs =
      averaged_absorption(tpat_ref, env, setup.tpat_scan, setup.policy, Leg::Upper, par);
  const double ref_peak = max_value(ref_abs);
  if (!(ref_peak > 0.0)) throw CalibrationError("upper-leg absorption vanishes at n_ref");

  ScanNResult result;
  for (int n : ns) {
    const LadderSystem eit_sys = at_n(setup.eit_base, n);
    TransmissionSpectrum eit = eit_spectrum(eit_sys, env, setup.cal, setup.eit_scan, setup.policy, par);

    const LadderSystem tpat_sys = at_n(setup.tpat_base, n);
    const double strength = tpat_sys.omega_u / tpat_ref.omega_u;
    const double strength_sq = strength * strength;
    std::vector<double> od =
        n == atom.n_ref ? ref_abs
                        : averaged_absorption(tpat_sys, env, setup.tpat_scan, setup.policy,
                                              Leg::Upper, par);
    for (double& d : od) d = non_negative_od(setup.cal.d_peak_upper * (d / ref_peak) * strength_sq);
    TransmissionSpectrum tpat = make_spectrum(tpat_sys, env, setup.policy, setup.tpat_scan,
                                              Leg::Upper, std::move(od));

    const FeatureMetrics em = feature_metrics(
        eit, FeatureMode::Eit, BaselineWindow::outer_fraction(eit, setup.baseline_fraction));
    const FeatureMetrics tm = feature_metrics(
        tpat, FeatureMode::Tpat, BaselineWindow::outer_fraction(tpat, setup.baseline_fraction));
    result.rows.push_back({n, em.depth, tm.depth});
    result.eit_spectra.push_back(std::move(eit));
    result.tpat_spectra.push_back(std::move(tpat));
  }
  return result;
}

}  // namespace ladder

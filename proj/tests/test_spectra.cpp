#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ladder/spectra.hpp"
#include "ladder/units.hpp"

using namespace ladder;

namespace {

const AtomSpec kAtom = rb87_ladder();
const DopplerEnvironment kHot(celsius_to_kelvin(89.0), kAtom);
const DopplerEnvironment kCold = DopplerEnvironment::with_sigma(1e-4, kAtom);

LadderSystem eit_ladder() { return LadderSystem::from_atom(kAtom, 30, 0.0, 0.0, hz_to_rad(40e3), hz_to_rad(1.2e6)); }
LadderSystem tpat_ladder() { return LadderSystem::from_atom(kAtom, 30, 0.0, 0.0, hz_to_rad(4.8e6), hz_to_rad(36e3)); }

ScanSpec upper_scan(double half_hz, int points) {
  return {Leg::Upper, hz_to_rad(-half_hz), hz_to_rad(half_hz), points};
}

TransmissionSpectrum synthetic(const std::vector<double>& x, const std::vector<double>& t) {
  TransmissionSpectrum s;
  s.scan_axis = x;
  s.transmission = t;
  return s;
}

std::vector<double> axis(double lo, double hi, int n) {
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = lo + (hi - lo) * i / (n - 1);
  return x;
}

void check_physical(const TransmissionSpectrum& s) {
  for (std::size_t i = 0; i < s.transmission.size(); ++i) {
    CHECK(s.transmission[i] > 0.0);
    CHECK(s.transmission[i] <= 1.0);
    if (i > 0) CHECK(s.scan_axis[i] > s.scan_axis[i - 1]);
  }
}

}  // namespace

TEST_CASE("Beer-Lambert transmission") {
  CHECK(transmission_from_od(0.0) == 1.0);
  CHECK(transmission_from_od(1e-2) == doctest::Approx(0.990049833749168).epsilon(1e-15));
  CHECK(transmission_from_od(std::log(2.0)) == doctest::Approx(0.5).epsilon(1e-15));
  double prev = 1.0;
  for (double d = 0.1; d < 20.0; d += 0.1) {
    const double t = transmission_from_od(d);
    CHECK(t < prev);
    CHECK(t > 0.0);
    prev = t;
  }
  CHECK_THROWS_AS(transmission_from_od(-1e-3), DomainError);
}

TEST_CASE("calibration validation") {
  OpticalDepthCalibration cal;
  CHECK(cal.d_peak_upper == 1e-2);
  CHECK_NOTHROW(cal.validate());
  cal.d0_lower = -1.0;
  CHECK_THROWS_AS(cal.validate(), DomainError);
  cal = {};
  cal.d_peak_upper = -1e-3;
  CHECK_THROWS_AS(cal.validate(), DomainError);
}

TEST_CASE("two-level lower-leg spectrum hits the calibrated depth") {
  LadderSystem s = eit_ladder();
  s.omega_u = 0.0;
  const ScanSpec scan{Leg::Lower, hz_to_rad(-1.5e9), hz_to_rad(1.5e9), 61};
  const TransmissionSpectrum spec = eit_spectrum(s, kHot, {}, scan, GridPolicy{});
  check_physical(spec);
  CHECK(spec.leg == Leg::Lower);
  CHECK(spec.scanned == Leg::Lower);
  CHECK(spec.temperature == kHot.temperature());
  const double centre = spec.transmission[30];
  CHECK(spec.scan_axis[30] == 0.0);
  CHECK(centre == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(*std::min_element(spec.transmission.begin(), spec.transmission.end()) == centre);
  // Doppler width: 1/e half-width of the Gaussian core, k sigma sqrt(2).
  CHECK(spec.transmission.front() > 0.99);

  const double ref = two_level_reference(s, kHot, GridPolicy{});
  LadderSystem bare = s;
  bare.delta_l = 0.0;
  CHECK(ref == doctest::Approx(average_coherence(bare, build_grid(kHot, bare, GridPolicy{}), Leg::Lower).imag())
                   .epsilon(1e-13));

  OpticalDepthCalibration deep;
  deep.d0_lower = 3.0;
  CHECK(eit_spectrum(s, kHot, deep, scan, GridPolicy{}).transmission[30] ==
        doctest::Approx(std::exp(-3.0)).epsilon(1e-12));

  LadderSystem dark = s;
  dark.omega_l = 0.0;
  CHECK_THROWS_AS(eit_spectrum(dark, kHot, {}, scan, GridPolicy{}), DomainError);
}

TEST_CASE("hot EIT feature is small against the single-photon dip") {
  const TransmissionSpectrum spec = eit_spectrum(eit_ladder(), kHot, {}, upper_scan(10e6, 101), GridPolicy{});
  check_physical(spec);
  const std::size_t mid = 50;
  CHECK(spec.scan_axis[mid] == 0.0);
  // Local extremum at two-photon resonance.
  const double t0 = spec.transmission[mid];
  const bool is_min = t0 < spec.transmission[mid - 1] && t0 < spec.transmission[mid + 1];
  const bool is_max = t0 > spec.transmission[mid - 1] && t0 > spec.transmission[mid + 1];
  CHECK((is_min || is_max));
  const FeatureMetrics m = feature_metrics(spec, FeatureMode::Eit, BaselineWindow::outer_fraction(spec, 0.1));
  const double single_photon_dip = 1.0 - m.baseline;
  CHECK(single_photon_dip > 0.5);
  CHECK(std::abs(t0 - m.baseline) < 1e-2 * single_photon_dip);
}

TEST_CASE("cold EIT window agrees with the weak-probe formula") {
  const LadderSystem s = eit_ladder();
  const ScanSpec scan{Leg::Lower, hz_to_rad(-3e6), hz_to_rad(3e6), 121};
  const TransmissionSpectrum spec = eit_spectrum(s, kCold, {}, scan, GridPolicy{});
  check_physical(spec);

  LadderSystem bare = s;
  bare.omega_u = 0.0;
  const double ref = weak_probe_chi_lower(bare, 0.0).imag();
  for (std::size_t i = 0; i < spec.scan_axis.size(); ++i) {
    const double analytic = weak_probe_chi_lower(with_detuning(s, Leg::Lower, spec.scan_axis[i]), 0.0).imag() / ref;
    CHECK(-std::log(spec.transmission[i]) == doctest::Approx(analytic).epsilon(5e-3));
  }

  // Transparency at two-photon resonance between the Autler-Townes minima.
  const std::size_t mid = 60;
  const auto left = std::min_element(spec.transmission.begin(), spec.transmission.begin() + mid);
  const auto right = std::min_element(spec.transmission.begin() + mid + 1, spec.transmission.end());
  CHECK(spec.transmission[mid] > *left);
  CHECK(spec.transmission[mid] > *right);
  CHECK(spec.transmission[mid] > 0.95);
}

TEST_CASE("EIT contrast: Doppler averaging suppresses the feature") {
  const ScanSpec scan = upper_scan(10e6, 201);
  auto contrast = [&](const DopplerEnvironment& env) {
    const TransmissionSpectrum spec = eit_spectrum(eit_ladder(), env, {}, scan, GridPolicy{});
    return feature_metrics(spec, FeatureMode::Eit, BaselineWindow::outer_fraction(spec, 0.1)).contrast;
  };
  const double cold = contrast(kCold);
  const double hot = contrast(kHot);
  CHECK(cold > 0.9);
  CHECK(hot > 0.0);
  CHECK(cold / hot >= 10.0);
}

TEST_CASE("TPAT spectrum: calibrated, symmetric doublet") {
  const ScanSpec scan = upper_scan(20e6, 201);
  const TransmissionSpectrum spec = tpat_spectrum(tpat_ladder(), kHot, {}, scan, GridPolicy{});
  check_physical(spec);
  CHECK(spec.leg == Leg::Upper);
  const double t_min = *std::min_element(spec.transmission.begin(), spec.transmission.end());
  CHECK(t_min == doctest::Approx(std::exp(-1e-2)).epsilon(1e-14));
  for (std::size_t i = 0; i < spec.transmission.size(); ++i) {
    CHECK(std::abs(spec.transmission[i] - spec.transmission[spec.transmission.size() - 1 - i]) <= 1e-6);
  }
  const FeatureMetrics m = feature_metrics(spec, FeatureMode::Tpat, BaselineWindow::outer_fraction(spec, 0.1));
  CHECK(m.resolved);
  REQUIRE(m.at_splitting.has_value());
  CHECK(*m.at_splitting > 0.5 * tpat_ladder().omega_l);
  CHECK(*m.at_splitting < 1.5 * tpat_ladder().omega_l);
  CHECK(m.depth == doctest::Approx(0.995e-2).epsilon(1e-2));
  CHECK(m.contrast >= 1e-3);
  CHECK(m.contrast <= 1e-2);
  REQUIRE(m.fwhm.has_value());
  CHECK(*m.fwhm > 0.0);

  OpticalDepthCalibration cal;
  cal.d_peak_upper = 0.05;
  const TransmissionSpectrum deeper = tpat_spectrum(tpat_ladder(), kHot, cal, scan, GridPolicy{});
  for (std::size_t i = 0; i < spec.transmission.size(); ++i) {
    CHECK(std::log(deeper.transmission[i]) == doctest::Approx(5.0 * std::log(spec.transmission[i])).epsilon(1e-12));
  }
}

TEST_CASE("TPAT spectrum errors") {
  LadderSystem s = tpat_ladder();
  CHECK_THROWS_AS(tpat_spectrum(s, kHot, {}, ScanSpec{Leg::Lower, -1.0, 1.0, 5}, GridPolicy{}), DomainError);
  s.omega_l = 0.0;
  CHECK_THROWS_AS(tpat_spectrum(s, kHot, {}, upper_scan(5e6, 11), GridPolicy{}), CalibrationError);
}

TEST_CASE("cold TPAT doublet splits by the lower Rabi frequency") {
  LadderSystem s = tpat_ladder();
  s.omega_l = hz_to_rad(20e6);
  const TransmissionSpectrum spec = tpat_spectrum(s, kCold, {}, upper_scan(30e6, 601), GridPolicy{});
  const FeatureMetrics m = feature_metrics(spec, FeatureMode::Tpat, BaselineWindow::outer_fraction(spec, 0.1));
  REQUIRE(m.at_splitting.has_value());
  CHECK(*m.at_splitting == doctest::Approx(s.omega_l).epsilon(0.05));
}

TEST_CASE("hot TPAT splitting grows with the lower Rabi frequency") {
  double prev = 0.0;
  for (double omega_hz : {2.4e6, 4.8e6, 7.2e6, 9.6e6, 12e6}) {
    LadderSystem s = tpat_ladder();
    s.omega_l = hz_to_rad(omega_hz);
    const TransmissionSpectrum spec = tpat_spectrum(s, kHot, {}, upper_scan(25e6, 201), GridPolicy{512, 256});
    const FeatureMetrics m = feature_metrics(spec, FeatureMode::Tpat, BaselineWindow::outer_fraction(spec, 0.1));
    REQUIRE(m.at_splitting.has_value());
    CHECK(*m.at_splitting >= prev);
    prev = *m.at_splitting;
  }
}

TEST_CASE("spectra do not depend on the worker count") {
  const ScanSpec scan = upper_scan(10e6, 23);
  const auto a = tpat_spectrum(tpat_ladder(), kHot, {}, scan, GridPolicy{256, 64}, Parallelism{1});
  const auto b = tpat_spectrum(tpat_ladder(), kHot, {}, scan, GridPolicy{256, 64}, Parallelism{3});
  CHECK(a.transmission == b.transmission);
  const auto c = eit_spectrum(eit_ladder(), kHot, {}, scan, GridPolicy{256, 64}, Parallelism{1});
  const auto d = eit_spectrum(eit_ladder(), kHot, {}, scan, GridPolicy{256, 64}, Parallelism{4});
  CHECK(c.transmission == d.transmission);
}

TEST_CASE("upper-leg transmission with a frozen calibration") {
  const ScanSpec scan = upper_scan(20e6, 41);
  const GridPolicy policy{256, 64};
  const TransmissionSpectrum spec = tpat_spectrum(tpat_ladder(), kHot, {}, scan, policy);
  const UpperLegTransmission tu(tpat_ladder(), kHot, {}, scan, policy);
  for (std::size_t i = 0; i < spec.scan_axis.size(); ++i) {
    CHECK(tu(0.0, spec.scan_axis[i]) == spec.transmission[i]);
  }
  const auto abs = averaged_absorption(tpat_ladder(), kHot, scan, policy, Leg::Upper);
  CHECK(tu.od_per_absorption() == 1e-2 / *std::max_element(abs.begin(), abs.end()));
  // Off the calibration scan the transmission still lies in (0, 1].
  const double t = tu(hz_to_rad(3e6), hz_to_rad(-1e6));
  CHECK(t > 0.0);
  CHECK(t <= 1.0);
}

TEST_CASE("feature metrics on synthetic spectra") {
  const std::vector<double> x = axis(-10.0, 10.0, 401);

  SUBCASE("flat spectrum is unresolved") {
    const auto m = feature_metrics(synthetic(x, std::vector<double>(x.size(), 0.7)), FeatureMode::Tpat,
                                   {-8.0, 8.0});
    CHECK_FALSE(m.resolved);
    CHECK(m.contrast == 0.0);
    CHECK_FALSE(m.at_splitting.has_value());
    CHECK_FALSE(m.fwhm.has_value());
  }
  SUBCASE("gaussian dip") {
    std::vector<double> t(x.size());
    const double sigma = 1.2;
    for (std::size_t i = 0; i < x.size(); ++i) t[i] = 0.5 - 0.01 * std::exp(-0.5 * x[i] * x[i] / (sigma * sigma));
    const auto m = feature_metrics(synthetic(x, t), FeatureMode::Tpat, {-8.0, 8.0});
    CHECK(m.resolved);
    CHECK(m.baseline == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(m.depth == doctest::Approx(0.01).epsilon(1e-6));
    CHECK(m.contrast == doctest::Approx(0.02).epsilon(1e-6));
    CHECK(m.feature_detuning == 0.0);
    REQUIRE(m.fwhm.has_value());
    CHECK(*m.fwhm == doctest::Approx(2.0 * std::sqrt(2.0 * std::log(2.0)) * sigma).epsilon(1e-3));
    CHECK_FALSE(m.at_splitting.has_value());
  }
  SUBCASE("doublet splitting") {
    std::vector<double> t(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      t[i] = 0.9 - 0.02 * std::exp(-0.5 * std::pow((x[i] - 2.13) / 0.6, 2)) -
             0.02 * std::exp(-0.5 * std::pow((x[i] + 2.13) / 0.6, 2));
    }
    const auto m = feature_metrics(synthetic(x, t), FeatureMode::Tpat, {-8.0, 8.0});
    REQUIRE(m.at_splitting.has_value());
    CHECK(*m.at_splitting == doctest::Approx(4.26).epsilon(1e-3));
    // Equal dips: the tie goes to the smaller |detuning|, then the left one.
    CHECK(std::abs(m.feature_detuning) == doctest::Approx(2.15).epsilon(1e-9));
  }
  SUBCASE("EIT peak on an absorbing background") {
    std::vector<double> t(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) t[i] = 0.4 + 0.03 * std::exp(-0.5 * x[i] * x[i]);
    const auto m = feature_metrics(synthetic(x, t), FeatureMode::Eit, {-8.0, 8.0});
    CHECK(m.resolved);
    CHECK(m.contrast == doctest::Approx(0.03 / 0.6).epsilon(1e-6));
  }
  SUBCASE("noise floor") {
    std::vector<double> t(x.size(), 0.5);
    t[200] = 0.5 - 1e-13;
    CHECK_FALSE(feature_metrics(synthetic(x, t), FeatureMode::Tpat, {-8.0, 8.0}).resolved);
    CHECK(feature_metrics(synthetic(x, t), FeatureMode::Tpat, {-8.0, 8.0}, 1e-14).resolved);
  }
  SUBCASE("invalid windows") {
    const auto flat = synthetic(x, std::vector<double>(x.size(), 0.7));
    CHECK_THROWS_AS(feature_metrics(flat, FeatureMode::Tpat, {5.0, -5.0}), DomainError);
    CHECK_THROWS_AS(feature_metrics(flat, FeatureMode::Tpat, {-20.0, 20.0}), DomainError);
    CHECK_THROWS_AS(feature_metrics(flat, FeatureMode::Tpat, {11.0, 12.0}), DomainError);
    CHECK_THROWS_AS(BaselineWindow::outer_fraction(flat, 0.5), DomainError);
    const BaselineWindow w = BaselineWindow::outer_fraction(flat, 0.1);
    CHECK(w.low_edge == doctest::Approx(-8.0));
    CHECK(w.high_edge == doctest::Approx(8.0));
  }
}

TEST_CASE("scan over principal quantum number") {
  ScanNSetup setup;
  setup.atom = kAtom;
  setup.eit_base = eit_ladder();
  setup.tpat_base = tpat_ladder();
  setup.eit_scan = upper_scan(10e6, 101);
  setup.tpat_scan = upper_scan(20e6, 101);
  setup.policy = GridPolicy{512, 256};

  SUBCASE("n_ref reproduces the single-shot spectra exactly") {
    const ScanNResult r = scan_n({30}, setup, kHot);
    const auto eit = eit_spectrum(setup.eit_base, kHot, setup.cal, setup.eit_scan, setup.policy);
    const auto tpat = tpat_spectrum(setup.tpat_base, kHot, setup.cal, setup.tpat_scan, setup.policy);
    REQUIRE(r.rows.size() == 1);
    CHECK(r.eit_spectra[0].transmission == eit.transmission);
    CHECK(r.tpat_spectra[0].transmission == tpat.transmission);
    CHECK(r.rows[0].tpat_amplitude ==
          feature_metrics(tpat, FeatureMode::Tpat, BaselineWindow::outer_fraction(tpat, 0.1)).depth);
  }
  SUBCASE("amplitudes fall with n") {
    // The hot EIT amplitude is a few 1e-4; a coarse grid buries it in quadrature noise.
    setup.policy = GridPolicy{};
    const std::vector<int> ns{30, 40, 54, 60, 80};
    const ScanNResult r = scan_n(ns, setup, kHot);
    REQUIRE(r.rows.size() == ns.size());
    for (std::size_t i = 1; i < ns.size(); ++i) {
      CHECK(r.rows[i].n == ns[i]);
      CHECK(r.rows[i].eit_amplitude < r.rows[i - 1].eit_amplitude);
      CHECK(r.rows[i].tpat_amplitude < r.rows[i - 1].tpat_amplitude);
    }
    const double cubic = std::pow(kAtom.effective_principal(60) / kAtom.effective_principal(30), 3.0);
    CHECK(r.rows[0].tpat_amplitude / r.rows[3].tpat_amplitude == doctest::Approx(cubic).epsilon(0.2));
  }
  SUBCASE("range checks") {
    CHECK_THROWS_AS(scan_n({4}, setup, kHot), DomainError);
    CHECK_THROWS_AS(scan_n({30, 121}, setup, kHot), DomainError);
  }
}

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ladder/lockin.hpp"

using namespace ladder;

namespace {

const AtomSpec kAtom = rb87_ladder();
const DopplerEnvironment kHot(celsius_to_kelvin(89.0), kAtom);
const GridPolicy kPolicy{512, 256};

LadderSystem tpat_ladder(double omega_l_hz = 4.8e6) {
  return LadderSystem::from_atom(kAtom, 30, 0.0, 0.0, hz_to_rad(omega_l_hz), hz_to_rad(36e3));
}

ScanSpec upper_scan(double half_hz, int points) { return {Leg::Upper, hz_to_rad(-half_hz), hz_to_rad(half_hz), points}; }

std::vector<double> axis(double lo, double hi, int n) {
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = lo + (hi - lo) * i / (n - 1);
  return x;
}

std::size_t argmax_abs(const std::vector<double>& v) {
  std::size_t k = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (std::abs(v[i]) > std::abs(v[k])) k = i;
  }
  return k;
}

}  // namespace

TEST_CASE("modulation spec validation") {
  ModulationSpec m;
  CHECK(m.f_mod == 3e5);
  CHECK(m.samples_per_period == 64);
  CHECK_NOTHROW(m.validate());
  m.f_mod = 0.0;
  CHECK_THROWS_AS(m.validate(), DomainError);
  m = {};
  m.depth = -1.0;
  CHECK_THROWS_AS(m.validate(), DomainError);
  m = {};
  m.samples_per_period = 6;
  CHECK_THROWS_AS(m.validate(), DomainError);
  m.samples_per_period = 13;
  CHECK_THROWS_AS(m.validate(), DomainError);
  m = {};
  m.demod_phase = std::nan("");
  CHECK_THROWS_AS(m.validate(), DomainError);
}

TEST_CASE("lock metrics on synthetic discriminators") {
  SUBCASE("straight line") {
    const auto x = axis(-4.0, 4.0, 41);
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = 2.5 * x[i];
    const LockMetrics m = lock_metrics(x, y);
    CHECK(m.locked);
    CHECK(m.zero_crossing == 0.0);
    CHECK(m.slope == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(m.capture_range == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(m.edge_limited);
  }
  SUBCASE("crossing between samples is interpolated") {
    const auto x = axis(-4.0, 4.0, 40);
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = -0.7 * (x[i] - 0.03);
    const LockMetrics m = lock_metrics(x, y);
    CHECK(m.zero_crossing == doctest::Approx(0.03).epsilon(1e-12));
    CHECK(m.slope == doctest::Approx(-0.7).epsilon(1e-12));
  }
  SUBCASE("dispersive lobe") {
    const auto x = axis(-5.0, 5.0, 101);
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] / (1.0 + x[i] * x[i]);
    const LockMetrics m = lock_metrics(x, y);
    CHECK(m.low_extremum == doctest::Approx(-1.0));
    CHECK(m.high_extremum == doctest::Approx(1.0));
    CHECK(m.capture_range == doctest::Approx(2.0));
    CHECK_FALSE(m.edge_limited);
    // Least squares over +-3 samples of x/(1+x^2), spacing 0.1.
    double sxy = 0.0, sxx = 0.0;
    for (int k = -3; k <= 3; ++k) {
      const double xk = 0.1 * k;
      sxy += xk * xk / (1.0 + xk * xk);
      sxx += xk * xk;
    }
    CHECK(m.slope == doctest::Approx(sxy / sxx).epsilon(1e-12));
  }
  SUBCASE("the crossing nearest the scan centre wins") {
    const auto x = axis(-8.0, 14.0, 221);
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::sin(x[i]);
    const LockMetrics m = lock_metrics(x, y);
    CHECK(m.zero_crossing == doctest::Approx(std::numbers::pi).epsilon(1e-4));
    CHECK(m.slope < 0.0);
    CHECK(m.capture_range == doctest::Approx(std::numbers::pi).epsilon(2e-2));
  }
  SUBCASE("round-off sized values count as zeros") {
    const auto x = axis(-3.0, 3.0, 7);
    std::vector<double> a{-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0};
    std::vector<double> b = a;
    b[3] = -1e-20;
    CHECK(lock_metrics(x, a).slope == lock_metrics(x, b).slope);
    CHECK(lock_metrics(x, b).zero_crossing == 0.0);
  }
  SUBCASE("no sign change means no lock point") {
    const auto x = axis(-1.0, 1.0, 11);
    CHECK_FALSE(lock_metrics(x, std::vector<double>(11, 0.3)).locked);
    CHECK_FALSE(lock_metrics(x, std::vector<double>(11, 0.0)).locked);
  }
  SUBCASE("bad input") {
    CHECK_THROWS_AS(lock_metrics({0.0}, {1.0}), DomainError);
    CHECK_THROWS_AS(lock_metrics({0.0, 1.0}, {1.0}), DomainError);
  }
}

TEST_CASE("error signal from the modulated pipeline") {
  const ScanSpec scan = upper_scan(20e6, 41);
  const UpperLegTransmission tu(tpat_ladder(), kHot, {}, scan, kPolicy);
  ModulationSpec mod;
  mod.samples_per_period = 16;

  SUBCASE("zero depth gives an identically zero signal") {
    mod.depth = 0.0;
    const ErrorSignal e = error_signal(tu, mod, scan, 0.0);
    for (double v : e.values) CHECK(v == 0.0);
    CHECK_FALSE(e.metrics.locked);
  }
  SUBCASE("odd in the upper detuning for a symmetric configuration") {
    const ErrorSignal e = error_signal(tu, mod, scan, 0.0);
    const std::size_t n = e.values.size();
    const double peak = std::abs(e.values[argmax_abs(e.values)]);
    CHECK(peak > 1e-4);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(e.values[i] + e.values[n - 1 - i]) <= 1e-9 * peak);
    CHECK(e.metrics.locked);
    CHECK(std::abs(e.metrics.zero_crossing) <= 1e-9 * scan.stop);
    CHECK(std::isfinite(e.metrics.slope));
    CHECK(e.metrics.slope != 0.0);
    CHECK(e.warnings.empty());
  }
  SUBCASE("small depth reproduces the lower-detuning derivative") {
    mod.depth = kAtom.gamma_lower / 100.0;
    mod.demod_phase = 0.0;
    const ErrorSignal e = error_signal(tu, mod, scan, 0.0);
    const std::size_t k = argmax_abs(e.values);
    const double h = mod.depth;
    const double fd = (tu(h, e.scan_axis[k]) - tu(-h, e.scan_axis[k])) / (2.0 * h);
    CHECK(e.values[k] == doctest::Approx(mod.depth * fd).epsilon(1e-2));
    // Everywhere on the scan, against the same oracle.
    for (std::size_t i = 0; i < e.values.size(); ++i) {
      const double fdi = (tu(h, e.scan_axis[i]) - tu(-h, e.scan_axis[i])) / (2.0 * h);
      CHECK(std::abs(e.values[i] - mod.depth * fdi) <= 1e-2 * std::abs(e.values[k]));
    }
  }
  SUBCASE("slope is linear in small depth") {
    // The +-3 sample fit has to sit inside the central lobe.
    const ScanSpec fine = upper_scan(5e6, 101);
    mod.depth = kAtom.gamma_lower / 100.0;
    mod.demod_phase = 0.0;
    const double s1 = error_signal(tu, mod, fine, 0.0).metrics.slope;
    mod.depth *= 2.0;
    const double s2 = error_signal(tu, mod, fine, 0.0).metrics.slope;
    CHECK(s2 / s1 == doctest::Approx(2.0).epsilon(2e-2));
  }
  SUBCASE("automatic phase maximizes the central slope") {
    const ErrorSignal a = error_signal(tu, mod, scan, 0.0);
    CHECK(std::isfinite(a.demod_phase));
    for (double phase : {0.0, 0.5, 1.0, std::numbers::pi / 2, 2.0, 3.0}) {
      mod.demod_phase = phase;
      const ErrorSignal e = error_signal(tu, mod, scan, 0.0);
      CHECK(e.demod_phase == phase);
      if (e.metrics.locked) CHECK(std::abs(e.metrics.slope) <= std::abs(a.metrics.slope) * (1.0 + 1e-12));
    }
  }
  SUBCASE("independent of worker count") {
    const ErrorSignal a = error_signal(tu, mod, scan, 0.0, Parallelism{1});
    const ErrorSignal b = error_signal(tu, mod, scan, 0.0, Parallelism{5});
    CHECK(a.values == b.values);
    CHECK(a.demod_phase == b.demod_phase);
  }
  SUBCASE("fast modulation is flagged, not refused") {
    mod.f_mod = 2e6;
    const ErrorSignal e = error_signal(tu, mod, scan, 0.0);
    CHECK(e.warnings.size() == 1);
  }
  SUBCASE("only upper-leg scans") {
    CHECK_THROWS_AS(error_signal(tu, mod, ScanSpec{Leg::Lower, -1.0, 1.0, 5}, 0.0), DomainError);
  }
}

TEST_CASE("capture range grows with the lower Rabi frequency") {
  const ScanSpec scan = upper_scan(20e6, 81);
  ModulationSpec mod;
  mod.samples_per_period = 8;
  double prev = 0.0;
  for (double omega_hz : {2.4e6, 4.8e6, 7.2e6, 9.6e6}) {
    const UpperLegTransmission tu(tpat_ladder(omega_hz), kHot, {}, scan, kPolicy);
    const ErrorSignal e = error_signal(tu, mod, scan, 0.0);
    REQUIRE(e.metrics.locked);
    CHECK_FALSE(e.metrics.edge_limited);
    CHECK(e.metrics.capture_range > prev);
    prev = e.metrics.capture_range;
  }
  CHECK(prev > hz_to_rad(8e6));
}

#include "ladder/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "ladder/config.hpp"
#include "ladder/csv.hpp"
#include "ladder/noisefit.hpp"
#include "ladder/svg_plot.hpp"
#include "ladder/units.hpp"

namespace ladder::cli {

namespace fs = std::filesystem;

namespace {

std::vector<double> to_hz(const std::vector<double>& rad) {
  std::vector<double> out(rad.size());
  std::transform(rad.begin(), rad.end(), out.begin(), [](double w) { return hz_for_output(w); });
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string kv(const std::string& key, double value) { return key + " = " + format_number(value) + "\n"; }
std::string kv(const std::string& key, const std::string& value) { return key + " = " + value + "\n"; }
std::string kv(const std::string& key, bool value) { return kv(key, std::string(value ? "true" : "false")); }

void write_spectrum_csv(const fs::path& path, const TransmissionSpectrum& spec) {
  std::vector<std::vector<double>> rows;
  rows.reserve(spec.scan_axis.size());
  for (std::size_t i = 0; i < spec.scan_axis.size(); ++i) {
    rows.push_back({hz_for_output(spec.scan_axis[i]), spec.transmission[i]});
  }
  write_csv(path, "detuning_hz,transmission", rows);
}

std::string metrics_report(const FeatureMetrics& m, FeatureMode mode, const TransmissionSpectrum& spec) {
  std::string s = kv("mode", std::string(mode == FeatureMode::Eit ? "eit" : "tpat"));
  s += kv("resolved", m.resolved);
  s += kv("baseline", m.baseline);
  s += kv("depth", m.depth);
  s += kv("contrast", m.contrast);
  s += kv("feature_detuning_hz", hz_for_output(m.feature_detuning));
  if (m.fwhm) s += kv("fwhm_hz", hz_for_output(*m.fwhm));
  if (m.at_splitting) s += kv("at_splitting_hz", hz_for_output(*m.at_splitting));
  s += kv("min_transmission", *std::min_element(spec.transmission.begin(), spec.transmission.end()));
  return s;
}

void plot_spectrum(const fs::path& path, const TransmissionSpectrum& spec, const std::string& label) {
  write_line_plot(path, {{to_hz(spec.scan_axis), spec.transmission, label}}, "detuning (Hz)", "transmission");
}

// ---- subcommands ----------------------------------------------------------

void cmd_spectrum(const RunConfig& c, std::ostream& out) {
  const LadderSystem sys = c.ladder();
  const DopplerEnvironment env = c.environment();
  const Parallelism par{c.threads};
  const TransmissionSpectrum spec =
      c.mode == FeatureMode::Eit ? eit_spectrum(sys, env, c.calibration, c.scan, c.grid, par)
                                 : tpat_spectrum(sys, env, c.calibration, c.scan, c.grid, par);
  const FeatureMetrics m =
      feature_metrics(spec, c.mode, BaselineWindow::outer_fraction(spec, c.baseline_fraction), c.noise_floor);
  write_spectrum_csv(c.out_dir / "spectrum.csv", spec);
  write_text(c.out_dir / "metrics.txt", metrics_report(m, c.mode, spec) + describe(c));
  if (c.plot) plot_spectrum(c.out_dir / "spectrum.svg", spec, c.mode == FeatureMode::Eit ? "T_l" : "T_u");
  out << "wrote " << (c.out_dir / "spectrum.csv").string() << " (contrast " << format_number(m.contrast)
      << ")\n";
}

void cmd_map(const RunConfig& c, std::ostream& out) {
  const LadderSystem sys = c.ladder();
  const Parallelism par{c.threads};
  const bool quadrature = c.map_v_points == 0;
  VelocityGrid grid;
  std::vector<double> velocities;
  if (quadrature) {
    grid = build_grid(c.environment(), sys, c.grid);
    velocities = grid.nodes;
  } else {
    velocities = uniform_velocities(c.map_v_min, c.map_v_max, c.map_v_points);
  }
  const AbsorptionMap map = absorption_map(sys, c.scan, velocities, c.map_leg, par);
  const std::vector<double> scan_hz = to_hz(map.scan_axis);

  std::vector<std::vector<double>> rows;
  rows.reserve(velocities.size() * scan_hz.size());
  for (std::size_t i = 0; i < velocities.size(); ++i) {
    for (std::size_t j = 0; j < scan_hz.size(); ++j) {
      rows.push_back({velocities[i], scan_hz[j],
                      map.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))});
    }
  }
  write_csv(c.out_dir / "map.csv", "velocity_mps,detuning_hz,absorption", rows);

  if (quadrature) {
    std::vector<std::vector<double>> weights;
    for (std::size_t i = 0; i < grid.nodes.size(); ++i) weights.push_back({grid.nodes[i], grid.weights[i]});
    write_csv(c.out_dir / "map_weights.csv", "velocity_mps,weight", weights);

    // Independent evaluation of the Doppler average on the same nodes.
    const double omega = c.map_leg == Leg::Lower ? sys.omega_l : sys.omega_u;
    std::vector<double> average(map.scan_axis.size(), 0.0);
    if (omega > 0.0) {
      parallel_for(map.scan_axis.size(), par, [&](std::size_t j) {
        average[j] = average_coherence(with_detuning(sys, c.scan.axis, map.scan_axis[j]), grid, c.map_leg).imag();
      });
    }
    std::vector<std::vector<double>> avg_rows;
    for (std::size_t j = 0; j < scan_hz.size(); ++j) avg_rows.push_back({scan_hz[j], average[j]});
    write_csv(c.out_dir / "map_average.csv", "detuning_hz,absorption", avg_rows);
  }
  out << "wrote " << (c.out_dir / "map.csv").string() << " (" << rows.size() << " rows)\n";
}

std::string lock_report(const ErrorSignal& es) {
  const LockMetrics& m = es.metrics;
  std::string s = kv("locked", m.locked);
  s += kv("zero_crossing_hz", hz_for_output(m.zero_crossing));
  s += kv("slope_per_hz", m.slope * kTwoPi);
  s += kv("capture_range_hz", hz_for_output(m.capture_range));
  s += kv("low_extremum_hz", hz_for_output(m.low_extremum));
  s += kv("high_extremum_hz", hz_for_output(m.high_extremum));
  s += kv("edge_limited", m.edge_limited);
  s += kv("demod_phase_rad", es.demod_phase);
  for (const auto& w : es.warnings) s += kv("warning", w);
  return s;
}

ErrorSignal run_error_signal(const RunConfig& c, const LadderSystem& sys) {
  const Parallelism par{c.threads};
  const UpperLegTransmission transmission(sys, c.environment(), c.calibration, c.scan, c.grid, par);
  return error_signal(transmission, c.modulation, c.scan, sys.delta_l, par);
}

void cmd_errorsig(const RunConfig& c, std::ostream& out) {
  const LadderSystem sys = c.ladder();
  const ErrorSignal es = run_error_signal(c, sys);
  const std::vector<double> scan_hz = to_hz(es.scan_axis);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < scan_hz.size(); ++i) rows.push_back({scan_hz[i], es.values[i]});
  write_csv(c.out_dir / "errorsig.csv", "detuning_hz,error", rows);
  write_text(c.out_dir / "lock_report.txt", lock_report(es) + describe(c));
  for (const auto& w : es.warnings) out << "warning: " << w << '\n';

  if (!c.omega_l_sweep.empty()) {
    std::vector<std::vector<double>> sweep;
    for (double omega_l : c.omega_l_sweep) {
      LadderSystem s = sys;
      s.omega_l = omega_l;
      const LockMetrics m = run_error_signal(c, s).metrics;
      sweep.push_back({hz_for_output(omega_l), hz_for_output(m.capture_range), m.slope * kTwoPi,
                       hz_for_output(m.zero_crossing)});
    }
    write_csv(c.out_dir / "capture_sweep.csv",
              "omega_lower_hz,capture_range_hz,slope_per_hz,zero_crossing_hz", sweep);
  }
  if (c.plot) {
    write_line_plot(c.out_dir / "errorsig.svg", {{scan_hz, es.values, "error"}}, "upper-leg detuning (Hz)",
                    "error signal");
  }
  out << "wrote " << (c.out_dir / "errorsig.csv").string() << '\n';
}

std::vector<double> initial_guess(NoiseModelKind kind, const DataSeries& d) {
  const auto lo = std::min_element(d.x.begin(), d.x.end()) - d.x.begin();
  if (kind == NoiseModelKind::Waist) {
    return {std::abs(d.y[lo] * d.x[lo]), *std::min_element(d.y.begin(), d.y.end())};
  }
  const auto peak = std::max_element(d.y.begin(), d.y.end()) - d.y.begin();
  const double xp = std::max(d.x[peak], 1e-3);
  const double b = 1.0 / (2.0 * xp);
  const double a = d.y[peak] / (std::sqrt(xp) * std::exp(-0.5));
  return {a, b, std::abs(d.y[lo])};
}

void cmd_fit_noise(const RunConfig& c, const DataSeries& data, std::ostream& out) {
  const NoiseModelKind kind = c.fit_model == "waist" ? NoiseModelKind::Waist : NoiseModelKind::OpticalDepth;
  const std::vector<double> init = c.fit_init.empty() ? initial_guess(kind, data) : c.fit_init;
  const FitResult r = fit(kind, data, init);
  const std::vector<std::string> names = kind == NoiseModelKind::Waist
                                             ? std::vector<std::string>{"a", "b"}
                                             : std::vector<std::string>{"a", "b", "c"};
  std::string s = kv("model", c.fit_model);
  s += kv("points", static_cast<double>(data.x.size()));
  for (std::size_t i = 0; i < names.size(); ++i) {
    const double var = r.covariance(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
    s += kv(names[i], r.params[i]);
    s += kv("sigma_" + names[i], std::sqrt(std::max(var, 0.0)));
    s += kv("cov_" + names[i] + names[i], var);
  }
  s += kv("residual_norm", r.residual_norm);
  s += kv("iterations", static_cast<double>(r.iterations));
  s += kv("converged", r.converged);
  write_text(c.out_dir / "fit_report.txt", s);
  out << s;

  if (c.plot) {
    std::vector<double> xs = data.x;
    std::sort(xs.begin(), xs.end());
    std::vector<double> model(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      model[i] = kind == NoiseModelKind::Waist
                     ? predict_waist_noise(xs[i], {r.params[0], r.params[1]})
                     : predict_od_noise(xs[i], {r.params[0], r.params[1], r.params[2]});
    }
    std::vector<std::size_t> order(data.x.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return data.x[a] < data.x[b]; });
    std::vector<double> ys;
    for (auto i : order) ys.push_back(data.y[i]);
    write_line_plot(c.out_dir / "fit.svg", {{xs, ys, "data"}, {xs, model, "fit"}},
                    kind == NoiseModelKind::Waist ? "waist" : "optical depth", "noise");
  }
}

void cmd_scan_n(const RunConfig& c, std::ostream& out) {
  ScanNSetup setup;
  setup.atom = c.atom;
  setup.eit_base = LadderSystem::from_atom(c.atom, c.atom.n_ref, c.delta_l, c.delta_u, c.scan_n.eit_omega_l,
                                           c.scan_n.eit_omega_u);
  setup.tpat_base = LadderSystem::from_atom(c.atom, c.atom.n_ref, c.delta_l, c.delta_u,
                                            c.scan_n.tpat_omega_l, c.scan_n.tpat_omega_u);
  for (LadderSystem* s : {&setup.eit_base, &setup.tpat_base}) {
    s->extra_dephasing_ge = c.dephasing_ge;
    s->extra_dephasing_gr = c.dephasing_gr;
  }
  setup.eit_scan = c.scan_n.eit_scan;
  setup.tpat_scan = c.scan_n.tpat_scan;
  setup.cal = c.calibration;
  setup.policy = c.grid;
  setup.baseline_fraction = c.baseline_fraction;

  const ScanNResult res = scan_n(c.scan_n.n_values, setup, c.environment(), Parallelism{c.threads});
  std::vector<std::vector<double>> rows;
  std::vector<double> ns, eit, tpat;
  for (const auto& r : res.rows) {
    rows.push_back({static_cast<double>(r.n), r.eit_amplitude, r.tpat_amplitude});
    ns.push_back(r.n);
    eit.push_back(r.eit_amplitude);
    tpat.push_back(r.tpat_amplitude);
  }
  write_csv(c.out_dir / "scan_n.csv", "n,eit_amplitude,tpat_amplitude", rows);
  if (c.scan_n.write_spectra) {
    for (std::size_t i = 0; i < res.rows.size(); ++i) {
      const std::string tag = "_n" + std::to_string(res.rows[i].n) + ".csv";
      write_spectrum_csv(c.out_dir / ("spectrum_eit" + tag), res.eit_spectra[i]);
      write_spectrum_csv(c.out_dir / ("spectrum_tpat" + tag), res.tpat_spectra[i]);
    }
  }
  if (c.plot) {
    write_line_plot(c.out_dir / "scan_n.svg", {{ns, eit, "EIT"}, {ns, tpat, "TPAT"}}, "n", "amplitude");
  }
  out << "wrote " << (c.out_dir / "scan_n.csv").string() << '\n';
}

// Subcommand-specific checks that the generic config validation cannot make.
void validate_for(const std::string& command, const RunConfig& c) {
  const LadderSystem sys = c.ladder();
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw InputError(msg);
  };
  if (command == "spectrum") {
    require(sys.omega_l > 0.0, "ladder.omega_lower_hz must be > 0 for spectrum");
    if (c.mode == FeatureMode::Tpat) {
      require(sys.omega_u > 0.0, "ladder.omega_upper_hz must be > 0 for a tpat spectrum");
      require(c.scan.axis == Leg::Upper, "scan.axis must be 'upper' for a tpat spectrum");
    }
  } else if (command == "errorsig") {
    require(sys.omega_l > 0.0 && sys.omega_u > 0.0, "ladder.omega_lower_hz and omega_upper_hz must be > 0");
    require(c.scan.axis == Leg::Upper, "scan.axis must be 'upper' for errorsig");
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Doppler-averaged ladder-scheme spectra, error signals and noise fits", "ladderspec"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<std::string> config_path;
  std::optional<std::string> out_dir;
  std::optional<int> threads;
  std::vector<std::string> sets;
  bool plot = false;
  app.add_option("--config", config_path, "Configuration file (INI sections, key = value)");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--threads", threads, "Worker threads (0 = hardware concurrency)");
  app.add_option("--set", sets, "Override a config value: section.key=value (repeatable)");
  app.add_flag("--plot", plot, "Also write SVG line plots");

  std::optional<std::string> mode;
  auto* spectrum = app.add_subcommand("spectrum", "Doppler-averaged transmission spectrum");
  spectrum->add_option("--mode", mode, "eit | tpat")->check(CLI::IsMember({"eit", "tpat"}));
  app.add_subcommand("map", "Velocity-resolved absorption map");
  app.add_subcommand("errorsig", "Modulation-transfer error signal");
  std::optional<std::string> data_path, model;
  std::vector<double> init;
  auto* fit_cmd = app.add_subcommand("fit-noise", "Fit a noise model to a two-column CSV");
  fit_cmd->add_option("--data", data_path, "CSV with x,y columns");
  fit_cmd->add_option("--model", model, "od | waist")->check(CLI::IsMember({"od", "waist"}));
  fit_cmd->add_option("--init", init, "Initial parameters, comma separated")->delimiter(',');
  app.add_subcommand("scan-n", "EIT and TPAT amplitudes versus principal quantum number");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalidInput;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  RunConfig config;
  DataSeries data;
  try {
    std::vector<std::string> overrides = sets;
    if (mode) overrides.push_back("spectrum.mode=" + *mode);
    if (data_path) overrides.push_back("fit.data=" + *data_path);
    if (model) overrides.push_back("fit.model=" + *model);
    config = load_config(config_path ? std::optional<fs::path>(*config_path) : std::nullopt, overrides);
    if (!init.empty()) config.fit_init = init;
    if (out_dir) config.out_dir = *out_dir;
    if (threads) {
      if (*threads < 0) throw InputError("--threads must be >= 0");
      config.threads = static_cast<unsigned>(*threads);
    }
    if (plot) config.plot = true;
    config.validate();
    validate_for(command, config);
    if (command == "fit-noise") {
      if (config.fit_data.empty()) throw InputError("fit-noise needs --data or fit.data");
      data = read_data_series(config.fit_data);
      const std::size_t np = parameter_count(config.fit_model == "waist" ? NoiseModelKind::Waist
                                                                         : NoiseModelKind::OpticalDepth);
      if (data.x.size() < 2 * np) {
        throw InputError("fit-noise needs at least " + std::to_string(2 * np) + " data points, got " +
                         std::to_string(data.x.size()));
      }
      const bool waist = config.fit_model == "waist";
      for (std::size_t i = 0; i < data.x.size(); ++i) {
        if (!std::isfinite(data.x[i]) || !std::isfinite(data.y[i])) throw InputError("data must be finite");
        if (waist && !(data.x[i] > 0.0)) throw InputError("waist column must be > 0");
        if (!waist && data.x[i] < 0.0) throw InputError("optical depth column must be >= 0");
      }
      if (!config.fit_init.empty() && config.fit_init.size() != np) {
        throw InputError("fit.init needs " + std::to_string(np) + " values");
      }
      for (double p : config.fit_init) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw InputError("fit.init values must be finite and >= 0");
      }
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalidInput;
  }

  try {
    fs::create_directories(config.out_dir);
    if (command == "spectrum") cmd_spectrum(config, out);
    else if (command == "map") cmd_map(config, out);
    else if (command == "errorsig") cmd_errorsig(config, out);
    else if (command == "fit-noise") cmd_fit_noise(config, data, out);
    else cmd_scan_n(config, out);
  } catch (const std::exception& e) {
    err << "computation failed: " << e.what() << '\n';
    return kExitComputationFailed;
  }
  return kExitOk;
}

}  // namespace ladder::cli

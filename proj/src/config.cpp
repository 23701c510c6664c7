#include "ladder/config.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "ladder/csv.hpp"
#include "ladder/units.hpp"

namespace ladder {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

int to_int(const std::string& v, const std::string& key) {
  const double x = parse_number(v, key);
  if (x != std::floor(x) || std::abs(x) > std::numeric_limits<int>::max()) {
    throw InputError(key + ": '" + v + "' is not an integer");
  }
  return static_cast<int>(x);
}

double hz(const std::string& v, const std::string& key) { return hz_to_rad(parse_number(v, key)); }

std::vector<double> number_list(const std::string& v, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(parse_number(item, key));
  }
  return out;
}

bool to_bool(const std::string& v, const std::string& key) {
  const std::string t = lower(trim(v));
  if (t == "true" || t == "yes" || t == "1" || t == "on") return true;
  if (t == "false" || t == "no" || t == "0" || t == "off") return false;
  throw InputError(key + ": '" + v + "' is not a boolean");
}

Leg to_leg(const std::string& v, const std::string& key) {
  const std::string t = lower(trim(v));
  if (t == "lower") return Leg::Lower;
  if (t == "upper") return Leg::Upper;
  throw InputError(key + ": expected 'lower' or 'upper', got '" + v + "'");
}

using Setter = std::function<void(RunConfig&, const std::string& value, const std::string& key)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"atom.mass_u", [](RunConfig& c, auto& v, auto& k) { c.atom.mass = parse_number(v, k) * kAtomicMassUnit; }},
      {"atom.lower_wavelength_nm", [](RunConfig& c, auto& v, auto& k) { c.atom.lower_wavelength = parse_number(v, k) * 1e-9; }},
      {"atom.upper_wavelength_nm", [](RunConfig& c, auto& v, auto& k) { c.atom.upper_wavelength = parse_number(v, k) * 1e-9; }},
      {"atom.gamma_lower_hz", [](RunConfig& c, auto& v, auto& k) { c.atom.gamma_lower = hz(v, k); }},
      {"atom.gamma_upper_ref_hz", [](RunConfig& c, auto& v, auto& k) { c.atom.gamma_upper_ref = hz(v, k); }},
      {"atom.n_ref", [](RunConfig& c, auto& v, auto& k) { c.atom.n_ref = to_int(v, k); }},
      {"atom.quantum_defect", [](RunConfig& c, auto& v, auto& k) { c.atom.quantum_defect = parse_number(v, k); }},

      {"ladder.n", [](RunConfig& c, auto& v, auto& k) { c.n = to_int(v, k); }},
      {"ladder.delta_lower_hz", [](RunConfig& c, auto& v, auto& k) { c.delta_l = hz(v, k); }},
      {"ladder.delta_upper_hz", [](RunConfig& c, auto& v, auto& k) { c.delta_u = hz(v, k); }},
      {"ladder.omega_lower_hz", [](RunConfig& c, auto& v, auto& k) { c.omega_l = hz(v, k); }},
      {"ladder.omega_upper_hz", [](RunConfig& c, auto& v, auto& k) { c.omega_u_ref = hz(v, k); }},
      {"ladder.dephasing_ge_hz", [](RunConfig& c, auto& v, auto& k) { c.dephasing_ge = hz(v, k); }},
      {"ladder.dephasing_gr_hz", [](RunConfig& c, auto& v, auto& k) { c.dephasing_gr = hz(v, k); }},

      {"cell.temperature", [](RunConfig& c, auto& v, auto&) { c.temperature = parse_temperature(v); }},

      {"calibration.d0_lower", [](RunConfig& c, auto& v, auto& k) { c.calibration.d0_lower = parse_number(v, k); }},
      {"calibration.d_peak_upper", [](RunConfig& c, auto& v, auto& k) { c.calibration.d_peak_upper = parse_number(v, k); }},

      {"grid.base_points", [](RunConfig& c, auto& v, auto& k) { c.grid.base_points = to_int(v, k); }},
      {"grid.window_points", [](RunConfig& c, auto& v, auto& k) { c.grid.window_points = to_int(v, k); }},

      {"scan.axis", [](RunConfig& c, auto& v, auto& k) { c.scan.axis = to_leg(v, k); }},
      {"scan.start_hz", [](RunConfig& c, auto& v, auto& k) { c.scan.start = hz(v, k); }},
      {"scan.stop_hz", [](RunConfig& c, auto& v, auto& k) { c.scan.stop = hz(v, k); }},
      {"scan.points", [](RunConfig& c, auto& v, auto& k) { c.scan.points = to_int(v, k); }},

      {"spectrum.mode", [](RunConfig& c, auto& v, auto& k) {
         const std::string t = lower(trim(v));
         if (t == "eit") c.mode = FeatureMode::Eit;
         else if (t == "tpat") c.mode = FeatureMode::Tpat;
         else throw InputError(k + ": expected 'eit' or 'tpat', got '" + v + "'");
       }},

      {"metrics.baseline_fraction", [](RunConfig& c, auto& v, auto& k) { c.baseline_fraction = parse_number(v, k); }},
      {"metrics.noise_floor", [](RunConfig& c, auto& v, auto& k) { c.noise_floor = parse_number(v, k); }},

      {"map.leg", [](RunConfig& c, auto& v, auto& k) { c.map_leg = to_leg(v, k); }},
      {"map.velocity_min_mps", [](RunConfig& c, auto& v, auto& k) { c.map_v_min = parse_number(v, k); }},
      {"map.velocity_max_mps", [](RunConfig& c, auto& v, auto& k) { c.map_v_max = parse_number(v, k); }},
      {"map.velocity_points", [](RunConfig& c, auto& v, auto& k) { c.map_v_points = to_int(v, k); }},

      {"modulation.f_mod_hz", [](RunConfig& c, auto& v, auto& k) { c.modulation.f_mod = parse_number(v, k); }},
      {"modulation.depth_hz", [](RunConfig& c, auto& v, auto& k) { c.modulation.depth = hz(v, k); }},
      {"modulation.demod_phase_rad", [](RunConfig& c, auto& v, auto& k) {
         if (lower(trim(v)) == "auto") c.modulation.demod_phase.reset();
         else c.modulation.demod_phase = parse_number(v, k);
       }},
      {"modulation.samples_per_period", [](RunConfig& c, auto& v, auto& k) { c.modulation.samples_per_period = to_int(v, k); }},
      {"modulation.omega_lower_sweep_hz", [](RunConfig& c, auto& v, auto& k) {
         c.omega_l_sweep.clear();
         for (double x : number_list(v, k)) c.omega_l_sweep.push_back(hz_to_rad(x));
       }},

      {"scan_n.n_values", [](RunConfig& c, auto& v, auto& k) {
         c.scan_n.n_values.clear();
         for (double x : number_list(v, k)) {
           if (x != std::floor(x)) throw InputError(k + ": n values must be integers");
           c.scan_n.n_values.push_back(static_cast<int>(x));
         }
       }},
      {"scan_n.eit_omega_lower_hz", [](RunConfig& c, auto& v, auto& k) { c.scan_n.eit_omega_l = hz(v, k); }},
      {"scan_n.eit_omega_upper_hz", [](RunConfig& c, auto& v, auto& k) { c.scan_n.eit_omega_u = hz(v, k); }},
      {"scan_n.tpat_omega_lower_hz", [](RunConfig& c, auto& v, auto& k) { c.scan_n.tpat_omega_l = hz(v, k); }},
      {"scan_n.tpat_omega_upper_hz", [](RunConfig& c, auto& v, auto& k) { c.scan_n.tpat_omega_u = hz(v, k); }},
      {"scan_n.eit_start_hz", [](RunConfig& c, auto& v, auto& k) { c.scan_n.eit_scan.start = hz(v, k); }},
      {"scan_n.eit_stop_hz", [](RunConfig& c, auto& v, auto& k) { c.scan_n.eit_scan.stop = hz(v, k); }},
      {"scan_n.eit_points", [](RunConfig& c, auto& v, auto& k) { c.scan_n.eit_scan.points = to_int(v, k); }},
      {"scan_n.tpat_start_hz", [](RunConfig& c, auto& v, auto& k) { c.scan_n.tpat_scan.start = hz(v, k); }},
      {"scan_n.tpat_stop_hz", [](RunConfig& c, auto& v, auto& k) { c.scan_n.tpat_scan.stop = hz(v, k); }},
      {"scan_n.tpat_points", [](RunConfig& c, auto& v, auto& k) { c.scan_n.tpat_scan.points = to_int(v, k); }},
      {"scan_n.write_spectra", [](RunConfig& c, auto& v, auto& k) { c.scan_n.write_spectra = to_bool(v, k); }},

      {"fit.data", [](RunConfig& c, auto& v, auto&) { c.fit_data = trim(v); }},
      {"fit.model", [](RunConfig& c, auto& v, auto& k) {
         const std::string t = lower(trim(v));
         if (t != "od" && t != "waist") throw InputError(k + ": expected 'od' or 'waist', got '" + v + "'");
         c.fit_model = t;
       }},
      {"fit.init", [](RunConfig& c, auto& v, auto& k) { c.fit_init = number_list(v, k); }},

      {"run.threads", [](RunConfig& c, auto& v, auto& k) {
         const int t = to_int(v, k);
         if (t < 0) throw InputError(k + " must be >= 0");
         c.threads = static_cast<unsigned>(t);
       }},
      {"output.plot", [](RunConfig& c, auto& v, auto& k) { c.plot = to_bool(v, k); }},
      {"output.directory", [](RunConfig& c, auto& v, auto&) { c.out_dir = trim(v); }},
  };
  return table;
}

void apply(RunConfig& config, const std::string& key, const std::string& value) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) throw InputError("unknown configuration key '" + key + "'");
  it->second(config, value, key);
}

void check(bool ok, const std::string& field, const std::string& bound) {
  if (!ok) throw InputError(field + " must be " + bound);
}

template <class F>
void with_context(const std::string& section, F&& f) {
  try {
    f();
  } catch (const DomainError& e) {
    throw InputError("[" + section + "] " + e.what());
  }
}

}  // namespace

double parse_temperature(const std::string& text) {
  std::string t = trim(text);
  std::size_t pos = t.size();
  while (pos > 0 && std::isalpha(static_cast<unsigned char>(t[pos - 1]))) --pos;
  std::string unit = lower(t.substr(pos));
  std::string number = trim(t.substr(0, pos));
  // Allow a UTF-8 degree sign in front of C.
  const std::string degree = "\xC2\xB0";
  if (number.size() >= degree.size() && number.compare(number.size() - degree.size(), degree.size(), degree) == 0) {
    number = trim(number.substr(0, number.size() - degree.size()));
    if (unit != "c") unit = "?";
  }
  const double value = parse_number(number, "cell.temperature");
  double kelvin;
  if (unit == "k") kelvin = value;
  else if (unit == "c" || unit == "degc") kelvin = celsius_to_kelvin(value);
  else throw InputError("cell.temperature: '" + text + "' needs a unit suffix C or K");
  check(kelvin > 0.0 && std::isfinite(kelvin), "cell.temperature", "above 0 K");
  return kelvin;
}

LadderSystem RunConfig::ladder() const {
  LadderSystem sys = LadderSystem::from_atom(atom, n, delta_l, delta_u, omega_l, omega_u_ref);
  sys.extra_dephasing_ge = dephasing_ge;
  sys.extra_dephasing_gr = dephasing_gr;
  return sys;
}

DopplerEnvironment RunConfig::environment() const { return DopplerEnvironment(temperature, atom); }

void RunConfig::validate() const {
  with_context("atom", [&] { atom.validate(); });
  check(n >= kMinPrincipal, "ladder.n", ">= " + std::to_string(kMinPrincipal));
  check(std::isfinite(delta_l), "ladder.delta_lower_hz", "finite");
  check(std::isfinite(delta_u), "ladder.delta_upper_hz", "finite");
  check(omega_l >= 0.0 && std::isfinite(omega_l), "ladder.omega_lower_hz", ">= 0");
  check(omega_u_ref >= 0.0 && std::isfinite(omega_u_ref), "ladder.omega_upper_hz", ">= 0");
  check(dephasing_ge >= 0.0 && std::isfinite(dephasing_ge), "ladder.dephasing_ge_hz", ">= 0");
  check(dephasing_gr >= 0.0 && std::isfinite(dephasing_gr), "ladder.dephasing_gr_hz", ">= 0");
  with_context("ladder", [&] { ladder().validate(); });
  check(temperature > 0.0 && std::isfinite(temperature), "cell.temperature", "above 0 K");
  with_context("calibration", [&] { calibration.validate(); });
  with_context("grid", [&] { grid.validate(); });
  with_context("scan", [&] { scan.validate(); });
  check(baseline_fraction > 0.0 && baseline_fraction < 0.5, "metrics.baseline_fraction", "in (0, 0.5)");
  check(noise_floor >= 0.0, "metrics.noise_floor", ">= 0");
  check(std::isfinite(map_v_min) && std::isfinite(map_v_max) && map_v_max > map_v_min,
        "map.velocity_max_mps", "greater than map.velocity_min_mps");
  check(map_v_points == 0 || map_v_points >= 2, "map.velocity_points", "0 (quadrature grid) or >= 2");
  with_context("modulation", [&] { modulation.validate(); });
  for (double w : omega_l_sweep) {
    check(w > 0.0 && std::isfinite(w), "modulation.omega_lower_sweep_hz", "a list of positive rates");
  }
  check(!scan_n.n_values.empty(), "scan_n.n_values", "non-empty");
  for (int v : scan_n.n_values) {
    check(v >= 10 && v <= 120, "scan_n.n_values", "within [10, 120]");
  }
  check(scan_n.eit_omega_l > 0.0, "scan_n.eit_omega_lower_hz", "> 0");
  check(scan_n.eit_omega_u > 0.0, "scan_n.eit_omega_upper_hz", "> 0");
  check(scan_n.tpat_omega_l > 0.0, "scan_n.tpat_omega_lower_hz", "> 0");
  check(scan_n.tpat_omega_u > 0.0, "scan_n.tpat_omega_upper_hz", "> 0");
  with_context("scan_n", [&] { scan_n.eit_scan.validate(); });
  with_context("scan_n", [&] { scan_n.tpat_scan.validate(); });
}

RunConfig load_config(const std::optional<std::filesystem::path>& file,
                      const std::vector<std::string>& overrides) {
  RunConfig config;
  if (file) {
    boost::property_tree::ptree tree;
    try {
      boost::property_tree::ini_parser::read_ini(file->string(), tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw InputError(std::string("config: ") + e.what());
    }
    for (const auto& [section, body] : tree) {
      if (body.empty()) throw InputError("config: key '" + section + "' is outside any section");
      for (const auto& [key, value] : body) apply(config, section + "." + key, value.data());
    }
  }
  for (const auto& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw InputError("override '" + item + "' must look like section.key=value");
    apply(config, trim(item.substr(0, eq)), item.substr(eq + 1));
  }
  return config;
}

std::string describe(const RunConfig& c) {
  std::ostringstream os;
  auto line = [&](const std::string& key, double value) { os << key << " = " << format_number(value) << '\n'; };
  const LadderSystem sys = c.ladder();
  line("n", c.n);
  line("temperature_k", c.temperature);
  line("sigma_v_mps", c.environment().sigma_v());
  line("lower_wavelength_m", c.atom.lower_wavelength);
  line("upper_wavelength_m", c.atom.upper_wavelength);
  line("delta_lower_hz", hz_for_output(sys.delta_l));
  line("delta_upper_hz", hz_for_output(sys.delta_u));
  line("omega_lower_hz", hz_for_output(sys.omega_l));
  line("omega_upper_hz", hz_for_output(sys.omega_u));
  line("gamma_lower_hz", hz_for_output(sys.gamma_l));
  line("gamma_upper_hz", hz_for_output(sys.gamma_u));
  line("dephasing_ge_hz", hz_for_output(sys.extra_dephasing_ge));
  line("dephasing_gr_hz", hz_for_output(sys.extra_dephasing_gr));
  line("d0_lower", c.calibration.d0_lower);
  line("d_peak_upper", c.calibration.d_peak_upper);
  line("grid_base_points", c.grid.base_points);
  line("grid_window_points", c.grid.window_points);
  os << "scan_axis = " << (c.scan.axis == Leg::Lower ? "lower" : "upper") << '\n';
  line("scan_start_hz", hz_for_output(c.scan.start));
  line("scan_stop_hz", hz_for_output(c.scan.stop));
  line("scan_points", c.scan.points);
  return os.str();
}

}  // namespace ladder

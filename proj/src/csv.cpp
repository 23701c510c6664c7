#include "ladder/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ladder/units.hpp"

namespace ladder {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

std::string format_number(double value) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

double hz_for_output(double rad) {
  const double hz = rad_to_hz(rad);
  if (!std::isfinite(hz)) return hz;
  // Several neighbouring doubles can map onto the same rad; the one a user
  // would have typed is the one with the shortest decimal form.
  double best = hz;
  std::size_t best_len = hz_to_rad(hz) == rad ? format_number(hz).size() : SIZE_MAX;
  double down = hz, up = hz;
  for (int step = 0; step < 4; ++step) {
    down = std::nextafter(down, -HUGE_VAL);
    up = std::nextafter(up, HUGE_VAL);
    for (double candidate : {down, up}) {
      if (hz_to_rad(candidate) != rad) continue;
      const std::size_t len = format_number(candidate).size();
      if (len < best_len) {
        best = candidate;
        best_len = len;
      }
    }
  }
  return best;
}

double parse_number(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  double value = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (!t.empty() && *first == '+') ++first;
  const auto res = std::from_chars(first, last, value);
  if (t.empty() || res.ec != std::errc() || res.ptr != last) {
    throw InputError(what + ": '" + text + "' is not a number");
  }
  return value;
}

void write_csv(const std::filesystem::path& path, const std::string& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << header << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out << ',';
      out << format_number(row[i]);
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

DataSeries read_data_series(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open data file " + path.string());
  DataSeries series;
  std::string line;
  bool header_seen = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    std::stringstream ss(t);
    std::string x, y, extra;
    if (!std::getline(ss, x, ',') || !std::getline(ss, y, ',') || std::getline(ss, extra, ',')) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": expected two columns");
    }
    const std::string where = path.string() + ":" + std::to_string(line_no);
    series.x.push_back(parse_number(x, where));
    series.y.push_back(parse_number(y, where));
  }
  if (!header_seen) throw InputError(path.string() + ": missing header line");
  return series;
}

}  // namespace ladder

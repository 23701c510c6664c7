#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "ladder/noisefit.hpp"

namespace ladder {

/// Malformed user input (config values, data files).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal string that parses back to exactly `value`.
std::string format_number(double value);

/// rad/s to Hz for output. Of the doubles x near rad / 2 pi with 2 pi x == rad,
/// returns the one with the shortest decimal form, so a value read in Hz is
/// written back unchanged.
double hz_for_output(double rad);

/// Parses a complete floating-point token; throws InputError otherwise.
double parse_number(const std::string& text, const std::string& what);

/// Writes a header line followed by one comma-separated row per entry.
void write_csv(const std::filesystem::path& path, const std::string& header,
               const std::vector<std::vector<double>>& rows);

/// Two-column (x, y) CSV: '#' comment lines (units), one header line, rows.
DataSeries read_data_series(const std::filesystem::path& path);

}  // namespace ladder

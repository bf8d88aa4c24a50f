#pragma once

#include <string>
#include <vector>

namespace ucw {

/// Shortest round-trip decimal form of a double (std::to_chars); parsing it
/// back recovers the exact value, so emitted CSVs are lossless.
std::string format_double(double value);

std::vector<std::string> split_csv_line(const std::string& line);

/// Reads a whole CSV file as rows of string fields (header included).
std::vector<std::vector<std::string>> read_csv(const std::string& path);

}  // namespace ucw

#pragma once

#include <string>
#include <vector>

namespace crlab {

/// One double rendered with 17 significant digits, enough to round-trip the
/// value exactly. Integral values come out without a decimal point.
std::string csv_number(double value);

/// Writes a header line followed by one line per row. Every row must match
/// the header width; a mismatch or an unwritable path throws
/// std::runtime_error naming the file.
void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows);

/// Writes pre-rendered text to a file, failing loudly on an unwritable path.
void write_text_file(const std::string& path, const std::string& content);

/// Whole file as a string; throws std::runtime_error if unreadable.
std::string read_text_file(const std::string& path);

}  // namespace crlab

#pragma once

// Minimal CSV helpers shared by the trace and experiment writers.

#include <string>
#include <string_view>
#include <vector>

namespace rfseek::csv {

/// Shortest-exact decimal text for a double (17 significant digits at most);
/// parse_double(format_double(v)) == v for every finite v. Infinities are
/// written as "inf" / "-inf".
[[nodiscard]] std::string format_double(double v);

[[nodiscard]] double parse_double(std::string_view text);

[[nodiscard]] long long parse_int(std::string_view text);

/// Splits one line on commas. Fields never contain commas or quotes here.
[[nodiscard]] std::vector<std::string_view> split(std::string_view line);

/// Reads a whole file into lines (LF separated, trailing CR tolerated).
[[nodiscard]] std::vector<std::string> read_lines(const std::string& path);

/// Writes text to a file, throwing std::runtime_error with the path on failure.
void write_file(const std::string& path, const std::string& text);

}  // namespace rfseek::csv

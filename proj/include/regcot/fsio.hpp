#pragma once

#include <filesystem>
#include <string>

namespace regcot {

/// Whole-file read; a missing or unreadable file raises DataError naming the path.
std::string read_text_file(const std::filesystem::path& path);

/// Writes to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// FNV-1a checksum of the file bytes, as 16 hex digits.
std::string file_checksum(const std::filesystem::path& path);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

/// `v` with `digits` significant digits, in %g notation.
std::string format_significant(double v, int digits);

/// Nearest double to `v` rounded to `digits` significant decimal digits.
double round_significant(double v, int digits);

}  // namespace regcot

#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace trackwall {

// Reads a UTF-8 data file, dropping blank lines and lines starting with `#`
// (after leading whitespace). Trailing CR is stripped. Throws
// Error(kFileUnreadable) when the file cannot be opened.
std::vector<std::string> read_data_lines(const std::filesystem::path& path);

// Same filtering over an in-memory document.
std::vector<std::string> split_data_lines(std::string_view text);

std::string trim(std::string_view s);
std::string ascii_lower(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

// Reads the whole file; throws Error(kFileUnreadable).
std::string read_file(const std::filesystem::path& path);

// Writes `contents` to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace trackwall

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace mergebench {

// Writes to a sibling temp file then renames over `path`. Parent directories
// are created. Throws Error on I/O failure.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Throws ParseError when the file cannot be opened.
std::string read_file(const std::filesystem::path& path);

// Shortest round-trip decimal form of a double ("%.17g").
std::string format_double(double v);

}  // namespace mergebench

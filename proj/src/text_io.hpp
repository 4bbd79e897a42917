#pragma once

// Small helpers shared by the file readers and writers.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace gembed::text {

/// 17-significant-digit decimal form ("%.17g"); round-trips every double exactly.
std::string format_double(double v);

std::vector<std::string_view> split(std::string_view line, char sep);

std::string_view trim(std::string_view s);

/// True for blank lines and lines whose first non-space character is '#'.
bool is_skippable(std::string_view line);

// The parse helpers throw DataError naming `path` and `line_no`.
double parse_double(std::string_view tok, const std::string& path, std::size_t line_no);
std::int64_t parse_int(std::string_view tok, const std::string& path, std::size_t line_no);

std::ifstream open_input(const std::filesystem::path& path);
std::ofstream open_output(const std::filesystem::path& path);

[[noreturn]] void fail(const std::string& path, std::size_t line_no, const std::string& msg);

}  // namespace gembed::text

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace rca {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
bool starts_with(std::string_view s, std::string_view prefix);

/// Case-insensitive substring search; returns npos when absent.
std::size_t ifind(std::string_view haystack, std::string_view needle, std::size_t pos = 0);

std::vector<std::string> split_lines(std::string_view text);

/// Fixed-notation rendering with 4 significant digits (e.g. 4.88 -> "4.880",
/// 353.0 -> "353.0", 0 -> "0.000"). Values >= 10000 keep integer digits.
std::string format_sig4(double v);

/// Shortest decimal string that round-trips to the same double.
std::string format_roundtrip(double v);

/// FNV-1a 64-bit hash; used for dataset fingerprints and prompt hashes.
std::uint64_t fnv1a64(std::string_view data);
std::string fnv1a64_hex(std::string_view data);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace rca

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ragprobe {

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::vector<std::string> split_whitespace(std::string_view s);
std::string to_lower_ascii(std::string_view s);
bool starts_with(std::string_view s, std::string_view prefix);

/// Shortest round-trip decimal form of a double; stable across runs.
std::string format_double(double value);

double parse_double(const std::string& s, const std::string& what);
int parse_int(const std::string& s, const std::string& what);
uint64_t parse_u64(const std::string& s, const std::string& what);

/// FNV-1a 64-bit. Stable across platforms; used to derive typo seeds.
uint64_t fnv1a64(std::string_view s);

/// Hex-encoded SHA-256 digest.
std::string sha256_hex(std::string_view data);

std::string read_file(const std::filesystem::path& path);
std::vector<std::string> read_lines(const std::filesystem::path& path);

/// Write via a temp file in the same directory, then rename into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace ragprobe

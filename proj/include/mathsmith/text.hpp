#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mathsmith {

// ASCII-only helpers. Bytes >= 0x80 (UTF-8 continuation or lead bytes) pass
// through untouched everywhere.

std::string trim(std::string_view s);
std::string lower_ascii(std::string_view s);

// Collapses every run of whitespace to a single space. Does not trim.
std::string collapse_whitespace(std::string_view s);

// Case-insensitive (ASCII) search; returns npos when absent.
size_t find_ci(std::string_view haystack, std::string_view needle, size_t pos = 0);
bool contains_ci(std::string_view haystack, std::string_view needle);

std::vector<std::string> split_lines(std::string_view s);

// Replaces every occurrence of `from` with `to`.
std::string replace_all(std::string_view s, std::string_view from, std::string_view to);

// FNV-1a, the project-wide content hash. 64-bit, stable across platforms.
uint64_t fnv1a64(std::string_view data, uint64_t seed = 0xcbf29ce484222325ULL);
std::string to_hex16(uint64_t value);

} // namespace mathsmith

#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace mathsmith {

// ordered_json everywhere a file is written: field order is part of the
// on-disk format, and re-emitting a loaded file must reproduce it byte for
// byte.
using Json = nlohmann::ordered_json;

std::string read_text_file(const std::filesystem::path& path);

// Writes via a sibling temp file + rename, so readers never observe a
// partially written artifact.
void write_text_file_atomic(const std::filesystem::path& path, const std::string& content);

// One JSON object per line. The visitor receives (1-based line number, parsed
// object). Malformed lines raise Errc::malformed_record with the line number.
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(size_t, const Json&)>& visit);

std::vector<Json> read_jsonl(const std::filesystem::path& path);
void write_jsonl_atomic(const std::filesystem::path& path, const std::vector<Json>& records);
std::string jsonl_to_string(const std::vector<Json>& records);

uint64_t hash_file(const std::filesystem::path& path);

} // namespace mathsmith

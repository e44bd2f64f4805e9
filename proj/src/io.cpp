#include "mathsmith/io.hpp"

#include <fstream>
#include <sstream>

#include "mathsmith/errors.hpp"
#include "mathsmith/text.hpp"

namespace mathsmith {

namespace fs = std::filesystem;

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Errc::io, "cannot open for reading: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) raise(Errc::io, "read failed: " + path.string());
    return buf.str();
}

void write_text_file_atomic(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) raise(Errc::io, "cannot open for writing: " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) raise(Errc::io, "write failed: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) raise(Errc::io, "rename failed: " + tmp.string() + " -> " + path.string());
}

void for_each_jsonl(const fs::path& path, const std::function<void(size_t, const Json&)>& visit) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Errc::io, "cannot open for reading: " + path.string());
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        Json record = Json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.is_object()) {
            raise(Errc::malformed_record,
                  path.string() + ":" + std::to_string(lineno) + ": not a JSON object");
        }
        visit(lineno, record);
    }
}

std::vector<Json> read_jsonl(const fs::path& path) {
    std::vector<Json> records;
    for_each_jsonl(path, [&](size_t, const Json& record) { records.push_back(record); });
    return records;
}

std::string jsonl_to_string(const std::vector<Json>& records) {
    std::string out;
    for (const Json& record : records) {
        out += record.dump();
        out += '\n';
    }
    return out;
}

void write_jsonl_atomic(const fs::path& path, const std::vector<Json>& records) {
    write_text_file_atomic(path, jsonl_to_string(records));
}

uint64_t hash_file(const fs::path& path) { return fnv1a64(read_text_file(path)); }

} // namespace mathsmith

#include "cft/json_io.hpp"
#include "cft/error.hpp"
#include "cft/rng.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace cft {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

json read_json_file(const std::filesystem::path& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw IoError("invalid JSON in " + path.string() + ": " + e.what());
    }
}

void write_json_file(const std::filesystem::path& path, const json& doc) {
    write_file(path, doc.dump(2) + "\n");
}

std::vector<json> read_jsonl_file(const std::filesystem::path& path) {
    std::string content = read_file(path);
    std::vector<json> out;
    size_t start = 0;
    size_t lineno = 0;
    while (start < content.size()) {
        size_t end = content.find('\n', start);
        if (end == std::string::npos) end = content.size();
        ++lineno;
        std::string_view line(content.data() + start, end - start);
        if (!line.empty()) {
            try {
                out.push_back(json::parse(line));
            } catch (const json::parse_error& e) {
                throw IoError("invalid JSONL at " + path.string() + ":" + std::to_string(lineno) +
                              ": " + e.what());
            }
        }
        start = end + 1;
    }
    return out;
}

void write_jsonl_file(const std::filesystem::path& path, const std::vector<json>& lines) {
    std::string buf;
    for (const json& line : lines) {
        buf += line.dump();
        buf += '\n';
    }
    write_file(path, buf);
}

void require_schema(const json& doc, int expected, const std::string& what) {
    if (!doc.is_object() || !doc.contains("schema_version"))
        throw ConfigError(what + ": missing schema_version");
    int got = doc.at("schema_version").get<int>();
    if (got != expected)
        throw ConfigError(what + ": schema_version " + std::to_string(got) +
                          " not supported (expected " + std::to_string(expected) + ")");
}

std::string fingerprint_bytes(std::string_view bytes) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(hash_bytes(bytes)));
    return buf;
}

std::string fingerprint(const json& doc) {
    return fingerprint_bytes(doc.dump());
}

} // namespace cft

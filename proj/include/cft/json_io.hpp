#pragma once
// File and JSON plumbing shared by every artifact.
//
// All artifacts are versioned JSON documents; JSONL files carry one object
// per line. Writers are deterministic: nlohmann::json orders keys, and no
// artifact embeds wall-clock time.

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace cft {

using json = nlohmann::json;

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& doc);

std::vector<json> read_jsonl_file(const std::filesystem::path& path);
void write_jsonl_file(const std::filesystem::path& path, const std::vector<json>& lines);

// Rejects documents whose schema_version is missing or unexpected.
void require_schema(const json& doc, int expected, const std::string& what);

// FNV-1a over the serialized form; change detection, not cryptography.
std::string fingerprint(const json& doc);
std::string fingerprint_bytes(std::string_view bytes);

} // namespace cft

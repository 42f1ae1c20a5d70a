#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace uca::cli {

inline constexpr const char* kToolVersion = "0.1.0";

struct RunManifest {
  std::string tool_version = kToolVersion;
  std::string command;
  std::map<std::string, std::string> config;   // key = value snapshot
  std::string input_path;
  std::string input_digest;                     // SHA-256, lowercase hex
  std::string started_at;                       // UTC, ISO 8601
  std::string finished_at;
  std::map<std::string, std::string> results;   // summary figures

  bool operator==(const RunManifest&) const = default;
};

std::string to_json_text(const RunManifest& m);
RunManifest manifest_from_json_text(std::string_view text);
void save_manifest(const std::filesystem::path& path, const RunManifest& m);
RunManifest load_manifest(const std::filesystem::path& path);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Current UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_timestamp();

/// key = value lines (as written by format_pipeline_config) to a map.
std::map<std::string, std::string> parse_key_values(std::string_view text);

}  // namespace uca::cli

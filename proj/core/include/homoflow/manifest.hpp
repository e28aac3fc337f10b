#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace homoflow {

std::string sha256_hex(std::string_view data);
// Throws InvalidInput when the file cannot be read.
std::string sha256_file(const std::filesystem::path& path);
// Files hash their bytes; directories hash the sorted (relative path, file
// hash) list of every regular file below them.
std::string sha256_path(const std::filesystem::path& path);

// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

struct RunManifest {
  std::string command;
  std::string config_json = "{}";
  std::vector<std::pair<std::string, std::uint64_t>> seeds;
  std::vector<std::pair<std::string, std::string>> inputs;   // (path, sha256)
  std::vector<std::string> outputs;
  std::string version;
  double wall_time_s = 0.0;

  void add_input(const std::filesystem::path& path);
  // Hash of everything except the wall time.
  std::string content_hash() const;
  std::string to_json() const;
};

std::string tool_version();

// Writes DIR/manifest.json atomically.
void write_manifest(const std::filesystem::path& dir, const RunManifest& manifest);

}  // namespace homoflow

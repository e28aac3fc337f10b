#include "homoflow/manifest.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "homoflow/error.hpp"

#ifndef HOMOFLOW_VERSION
#define HOMOFLOW_VERSION "0.0.0"
#endif

namespace homoflow {

namespace fs = std::filesystem;

namespace {

std::string hex(const unsigned char* bytes, unsigned len) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(digits[bytes[i] >> 4]);
    out.push_back(digits[bytes[i] & 15]);
  }
  return out;
}

nlohmann::json manifest_json(const RunManifest& m, bool with_time) {
  nlohmann::json j;
  j["command"] = m.command;
  j["config"] = nlohmann::json::parse(m.config_json);
  j["seeds"] = nlohmann::json::object();
  for (const auto& [name, seed] : m.seeds) j["seeds"][name] = seed;
  j["inputs"] = nlohmann::json::array();
  for (const auto& [path, hash] : m.inputs) j["inputs"].push_back({{"path", path}, {"sha256", hash}});
  j["outputs"] = m.outputs;
  j["version"] = m.version;
  if (with_time) j["wall_time_s"] = m.wall_time_s;
  return j;
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 failed");
  return hex(digest, len);
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot read " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return sha256_hex(bytes);
}

std::string sha256_path(const fs::path& path) {
  if (!fs::is_directory(path)) return sha256_file(path);
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(path))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::string listing;
  for (const auto& f : files) listing += fs::relative(f, path).generic_string() + '\t' + sha256_file(f) + '\n';
  return sha256_hex(listing);
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidInput("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw InvalidInput("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

void RunManifest::add_input(const fs::path& path) { inputs.emplace_back(path.string(), sha256_path(path)); }

std::string RunManifest::content_hash() const { return sha256_hex(manifest_json(*this, false).dump()); }

std::string RunManifest::to_json() const {
  auto j = manifest_json(*this, true);
  j["content_hash"] = content_hash();
  return j.dump(2) + "\n";
}

std::string tool_version() { return HOMOFLOW_VERSION; }

void write_manifest(const fs::path& dir, const RunManifest& manifest) {
  write_file_atomic(dir / "manifest.json", manifest.to_json());
}

}  // namespace homoflow

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace rachpred::io {

inline constexpr const char* kToolVersion = "0.1.0";

struct Artifact {
  std::string role;  // e.g. "trace", "checkpoint", "metrics"
  std::string path;  // relative to the manifest directory
  std::string fnv1a;  // content hash, hex
};

struct RunManifest {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
  nlohmann::json config;
  std::vector<std::string> inputs;
  std::vector<Artifact> artifacts;
  std::string tool_version = kToolVersion;
  std::string started_at;
  std::string finished_at;

  /// Hashes `file` and records it relative to `dir`.
  void add_artifact(const std::string& role, const std::filesystem::path& dir,
                    const std::filesystem::path& file);
};

std::string utc_timestamp();
std::string file_hash(const std::filesystem::path& path);

nlohmann::json to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const nlohmann::json& j);
void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);
RunManifest read_manifest(const std::filesystem::path& path);

}  // namespace rachpred::io

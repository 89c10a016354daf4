#include "rachpred/io/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "rachpred/common/errors.hpp"
#include "rachpred/common/rng.hpp"

namespace rachpred::io {

using nlohmann::json;

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string file_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(ss.str())));
  return buf;
}

void RunManifest::add_artifact(const std::string& role, const std::filesystem::path& dir,
                               const std::filesystem::path& file) {
  artifacts.push_back({role, std::filesystem::relative(file, dir).generic_string(), file_hash(file)});
}

json to_json(const RunManifest& m) {
  json artifacts = json::array();
  for (const auto& a : m.artifacts) {
    artifacts.push_back({{"role", a.role}, {"path", a.path}, {"fnv1a", a.fnv1a}});
  }
  return {{"command", m.command},   {"config_hash", m.config_hash}, {"seed", m.seed},
          {"config", m.config},     {"inputs", m.inputs},           {"artifacts", artifacts},
          {"tool_version", m.tool_version},
          {"started_at", m.started_at}, {"finished_at", m.finished_at}};
}

RunManifest manifest_from_json(const json& j) {
  try {
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.config = j.at("config");
    m.inputs = j.at("inputs").get<std::vector<std::string>>();
    for (const auto& a : j.at("artifacts")) {
      m.artifacts.push_back({a.at("role").get<std::string>(), a.at("path").get<std::string>(),
                             a.at("fnv1a").get<std::string>()});
    }
    m.tool_version = j.at("tool_version").get<std::string>();
    m.started_at = j.value("started_at", "");
    m.finished_at = j.value("finished_at", "");
    return m;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed manifest: ") + e.what());
  }
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << to_json(manifest).dump(2) << '\n';
}

RunManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  try {
    return manifest_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace rachpred::io

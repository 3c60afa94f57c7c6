#include "orgym/manifest.hpp"

#include <ctime>

#include "orgym/jsonio.hpp"

namespace orgym {

std::string now_utc() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string file_digest(const std::string& path) {
  return digest_hex(read_file(path));
}

std::string serialize_manifest(const RunManifest& m) {
  JsonWriter w;
  w.begin_object();
  w.key("tool");
  w.value(kToolName);
  w.key("version");
  w.value(kToolVersion);
  w.key("command");
  w.value(m.command);
  w.key("seed");
  w.value(m.seed);
  w.key("created_utc");
  w.value(m.created_utc);
  w.key("config");
  w.begin_object();
  for (const auto& [k, v] : m.config) {
    w.key(k);
    w.value(v);
  }
  w.end_object();
  w.key("inputs");
  w.begin_object();
  for (const auto& [k, v] : m.inputs) {
    w.key(k);
    w.value(v);
  }
  w.end_object();
  w.key("outputs");
  w.begin_object();
  for (const auto& [k, v] : m.outputs) {
    w.key(k);
    w.value(v);
  }
  w.end_object();
  w.end_object();
  return w.str();
}

std::string manifest_path_for(const std::string& artifact_path) {
  return artifact_path + ".manifest.json";
}

void write_manifest(const std::string& path, const RunManifest& m) {
  write_file(path, serialize_manifest(m) + "\n");
}

}  // namespace orgym

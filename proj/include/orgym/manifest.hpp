// Run manifests: a sidecar JSON written next to every CLI artifact that
// records exactly what produced it — tool version, subcommand, seed, knobs,
// and content digests of all inputs and outputs. Artifact files themselves
// never embed timestamps or host details, so reruns with the same manifest
// inputs are byte-identical; the wall-clock stamp lives only here.
#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace orgym {

inline constexpr const char* kToolName = "orgym";
inline constexpr const char* kToolVersion = "0.1.0";

struct RunManifest {
  std::string command;                         // CLI subcommand
  std::uint64_t seed = 0;                      // master seed for the run
  std::string created_utc;                     // from now_utc()
  std::map<std::string, std::string> config;   // knob -> stringified value
  std::map<std::string, std::string> inputs;   // path -> content digest
  std::map<std::string, std::string> outputs;  // path -> content digest
};

// Current time as "YYYY-MM-DDTHH:MM:SSZ".
std::string now_utc();

// Content digest of a file on disk (16 hex chars).
std::string file_digest(const std::string& path);

std::string serialize_manifest(const RunManifest& m);

// Sidecar path: "<artifact>.manifest.json".
std::string manifest_path_for(const std::string& artifact_path);

void write_manifest(const std::string& path, const RunManifest& m);

}  // namespace orgym

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace portwatch {

inline constexpr const char* kArtifactVersion = "0.1.0";

// Reproducibility record written as manifest.json next to each run's primary
// output: re-running the recorded subcommand with the recorded config and
// seed reproduces the outputs byte for byte.
struct RunManifest {
  std::string subcommand;
  std::map<std::string, std::string> config;
  std::uint64_t seed = 0;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::string version = kArtifactVersion;
};

// Writes <directory of primary_output>/manifest.json (overwriting any
// previous run's manifest in that directory).
void write_manifest(const RunManifest& manifest, const std::string& primary_output);

}  // namespace portwatch

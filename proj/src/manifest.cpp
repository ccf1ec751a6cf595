#include "portwatch/manifest.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace portwatch {

void write_manifest(const RunManifest& manifest, const std::string& primary_output) {
  namespace fs = std::filesystem;
  fs::path dir = fs::path(primary_output).parent_path();
  if (dir.empty()) dir = ".";
  const fs::path path = dir / "manifest.json";

  nlohmann::json j;
  j["subcommand"] = manifest.subcommand;
  j["config"] = manifest.config;
  j["seed"] = manifest.seed;
  j["inputs"] = manifest.inputs;
  j["outputs"] = manifest.outputs;
  j["version"] = manifest.version;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_manifest: cannot open " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write_manifest: write failed for " + path.string());
}

}  // namespace portwatch

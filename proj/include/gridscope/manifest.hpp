#pragma once

// Run manifest: one manifest.json per output directory recording the tool
// version, the inputs and parameters that produced the directory, and an
// FNV-1a checksum per output file. Reruns with the same inputs must yield
// the same checksums, so nothing time- or host-dependent goes in here.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gridscope/errors.hpp"

namespace gridscope {

inline constexpr const char* kToolName = "gridscope";
inline constexpr const char* kToolVersion = "0.1.0";

// FNV-1a, 64-bit. Not cryptographic; used to detect accidental divergence
// between runs, not tampering.
inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t checksum_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for checksum");
  char buf[1 << 16];
  std::uint64_t h = 0xcbf29ce484222325ULL;
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
    h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
  return h;
}

inline std::string checksum_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct RunManifest {
  std::string command;                          // subcommand that produced the dir
  std::vector<std::string> inputs;              // paths as given on the command line
  nlohmann::json parameters;                    // flag values, defaulted or not
  std::int64_t seed = 0;
  bool has_seed = false;
  std::map<std::string, std::string> outputs;   // filename -> fnv1a64 hex
};

// Checksums every regular file in out_dir except the manifest itself.
// Filenames are keyed relative to out_dir; map order makes the JSON stable.
inline void collect_output_checksums(RunManifest& m,
                                     const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  m.outputs.clear();
  for (const auto& entry : fs::recursive_directory_iterator(out_dir)) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), out_dir);
    if (rel == "manifest.json") continue;
    m.outputs[rel.generic_string()] = checksum_hex(checksum_file(entry.path()));
  }
}

inline nlohmann::json manifest_to_json(const RunManifest& m) {
  nlohmann::json j;
  j["tool"] = kToolName;
  j["version"] = kToolVersion;
  j["command"] = m.command;
  j["inputs"] = m.inputs;
  j["parameters"] = m.parameters.is_null() ? nlohmann::json::object() : m.parameters;
  if (m.has_seed) j["seed"] = m.seed;
  j["outputs"] = m.outputs;
  return j;
}

inline RunManifest manifest_from_json(const nlohmann::json& j) {
  RunManifest m;
  m.command = j.at("command").get<std::string>();
  m.inputs = j.at("inputs").get<std::vector<std::string>>();
  m.parameters = j.at("parameters");
  if (j.contains("seed")) {
    m.seed = j.at("seed").get<std::int64_t>();
    m.has_seed = true;
  }
  m.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
  return m;
}

// Writes out_dir/manifest.json, replacing any previous one so a directory
// never accumulates more than one manifest.
inline std::filesystem::path write_manifest(const std::filesystem::path& out_dir,
                                            RunManifest m) {
  collect_output_checksums(m, out_dir);
  const std::filesystem::path path = out_dir / "manifest.json";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << manifest_to_json(m).dump(2) << '\n';
  return path;
}

inline RunManifest read_manifest(const std::filesystem::path& out_dir) {
  const std::filesystem::path path = out_dir / "manifest.json";
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  return manifest_from_json(j);
}

}  // namespace gridscope

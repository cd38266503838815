#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "avsr/error.hpp"

namespace avsr {

struct ManifestRecord {
  std::string utterance_id;
  std::optional<std::string> audio_path;
  std::optional<std::string> grid_path;
  std::optional<std::string> landmarks_path;
  std::optional<std::string> transcript;
};

using Manifest = std::vector<ManifestRecord>;

/// JSON-lines manifest, one object per utterance. Relative paths resolve
/// against the manifest's directory; every referenced file must exist.
inline Manifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open manifest " + path);
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  const auto resolve = [&](const nlohmann::json& j, const char* key) -> std::optional<std::string> {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    std::filesystem::path p = j[key].get<std::string>();
    if (p.is_relative()) p = base / p;
    if (!std::filesystem::exists(p)) throw Error(ErrorCode::kIoError, "manifest references missing " + p.string());
    return p.string();
  };
  Manifest manifest;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      ManifestRecord r;
      r.utterance_id = j.at("utterance_id").get<std::string>();
      if (!ids.insert(r.utterance_id).second) {
        throw Error(ErrorCode::kParseError, "duplicate utterance_id '" + r.utterance_id + "'");
      }
      r.audio_path = resolve(j, "audio_path");
      r.grid_path = resolve(j, "grid_path");
      r.landmarks_path = resolve(j, "landmarks_path");
      if (j.contains("transcript") && !j["transcript"].is_null()) r.transcript = j["transcript"].get<std::string>();
      manifest.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParseError, path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return manifest;
}

inline nlohmann::json to_json(const ManifestRecord& r) {
  nlohmann::json j{{"utterance_id", r.utterance_id}};
  if (r.audio_path) j["audio_path"] = *r.audio_path;
  if (r.grid_path) j["grid_path"] = *r.grid_path;
  if (r.landmarks_path) j["landmarks_path"] = *r.landmarks_path;
  if (r.transcript) j["transcript"] = *r.transcript;
  return j;
}

}  // namespace avsr

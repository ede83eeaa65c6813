#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "docpretext/common.hpp"

namespace docpretext {

struct ManifestEntry {
  std::string id;
  std::string image;
  std::optional<std::string> text;
  std::optional<std::string> label;
};

// JSON Lines corpus listing; image/text paths are resolved relative to
// the manifest file's directory unless absolute.
struct Manifest {
  std::vector<ManifestEntry> entries;
  std::filesystem::path base_dir;

  std::string image_path(const ManifestEntry& e) const {
    std::filesystem::path p(e.image);
    return p.is_absolute() ? p.string() : (base_dir / p).string();
  }
  std::string text_path(const ManifestEntry& e) const {
    if (!e.text) throw LookupError("manifest entry '" + e.id + "' has no text");
    std::filesystem::path p(*e.text);
    return p.is_absolute() ? p.string() : (base_dir / p).string();
  }
};

inline Manifest load_manifest(const std::string& path, bool check_files = true) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  Manifest m;
  m.base_dir = std::filesystem::path(path).parent_path();
  std::set<std::string> ids;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DecodeError("manifest line " + std::to_string(lineno) + ": " + e.what());
    }
    ManifestEntry e;
    try {
      e.id = j.at("id").get<std::string>();
      e.image = j.at("image").get<std::string>();
      if (j.contains("text") && !j.at("text").is_null())
        e.text = j.at("text").get<std::string>();
      if (j.contains("label") && !j.at("label").is_null())
        e.label = j.at("label").get<std::string>();
    } catch (const nlohmann::json::exception& err) {
      throw DecodeError("manifest line " + std::to_string(lineno) + ": " + err.what());
    }
    if (!ids.insert(e.id).second)
      throw DecodeError("manifest: duplicate id '" + e.id + "'");
    m.entries.push_back(std::move(e));
  }
  if (check_files) {
    for (const auto& e : m.entries) {
      if (!std::filesystem::exists(m.image_path(e)))
        throw IoError("manifest: missing image file " + m.image_path(e));
      if (e.text && !std::filesystem::exists(m.text_path(e)))
        throw IoError("manifest: missing text file " + m.text_path(e));
    }
  }
  return m;
}

inline void save_manifest(const Manifest& m, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  for (const auto& e : m.entries) {
    nlohmann::json j;
    j["id"] = e.id;
    j["image"] = e.image;
    j["text"] = e.text ? nlohmann::json(*e.text) : nlohmann::json(nullptr);
    j["label"] = e.label ? nlohmann::json(*e.label) : nlohmann::json(nullptr);
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace docpretext

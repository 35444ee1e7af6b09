// Copyright (c) 2026 The CED Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ced/manifest.h"

#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace ced {

using nlohmann::json;

std::string Manifest::ResolveDataPath(const ManifestEntry& e) const {
  const std::string& p = e.features_path.empty() ? e.audio_path : e.features_path;
  if (p.empty() || std::filesystem::path(p).is_absolute() || base_dir.empty()) return p;
  return JoinPath(base_dir, p);
}

Manifest LoadManifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) Throw(ErrorKind::kIo, "cannot open manifest: " + path);
  Manifest m;
  m.path = path;
  m.base_dir = DirName(path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      Throw(ErrorKind::kIo, path + ":" + std::to_string(lineno) + ": bad JSON: " + e.what());
    }
    ManifestEntry entry;
    try {
      entry.id = j.at("id").get<std::string>();
      if (j.contains("features_path")) entry.features_path = j["features_path"].get<std::string>();
      if (j.contains("audio_path")) entry.audio_path = j["audio_path"].get<std::string>();
      entry.transcript = j.at("transcript").get<std::string>();
      entry.phonemes = j.at("phonemes").get<std::vector<std::string>>();
      entry.duration_frames = j.at("duration_frames").get<int>();
    } catch (const json::exception& e) {
      Throw(ErrorKind::kIo, path + ":" + std::to_string(lineno) + ": bad record: " + e.what());
    }
    Check(!entry.features_path.empty() || !entry.audio_path.empty(), ErrorKind::kIo,
          path + ":" + std::to_string(lineno) + ": record has neither features_path nor audio_path");
    m.entries.push_back(std::move(entry));
  }
  return m;
}

void SaveManifest(const Manifest& manifest, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) Throw(ErrorKind::kIo, "cannot write manifest: " + path);
  for (const auto& e : manifest.entries) {
    json j;
    j["id"] = e.id;
    if (!e.features_path.empty()) j["features_path"] = e.features_path;
    if (!e.audio_path.empty()) j["audio_path"] = e.audio_path;
    j["transcript"] = e.transcript;
    j["phonemes"] = e.phonemes;
    j["duration_frames"] = e.duration_frames;
    out << j.dump() << "\n";
  }
  if (!out) Throw(ErrorKind::kIo, "write failed: " + path);
}

}  // namespace ced

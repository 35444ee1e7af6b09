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

#ifndef CED_MANIFEST_H_
#define CED_MANIFEST_H_

#include <string>
#include <vector>

#include "ced/common.h"

namespace ced {

// One utterance record of a JSON Lines dataset manifest. Exactly one of
// features_path / audio_path is set; relative paths resolve against the
// manifest file's directory.
struct ManifestEntry {
  std::string id;
  std::string features_path;
  std::string audio_path;
  std::string transcript;
  std::vector<std::string> phonemes;  // symbol strings
  int duration_frames = 0;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  std::string path;      // file it was loaded from, empty if in-memory
  std::string base_dir;  // directory for resolving relative data paths

  std::string ResolveDataPath(const ManifestEntry& e) const;
};

Manifest LoadManifest(const std::string& path);
void SaveManifest(const Manifest& manifest, const std::string& path);

}  // namespace ced

#endif  // CED_MANIFEST_H_

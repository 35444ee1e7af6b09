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

#include "ced/checkpoint.h"

#include <cstring>

namespace ced {

namespace {

constexpr char kMagic[4] = {'C', 'E', 'D', 'W'};
constexpr uint32_t kVersion = 1;

void AppendU32(std::string* out, uint32_t v) {
  out->push_back(static_cast<char>(v & 0xff));
  out->push_back(static_cast<char>((v >> 8) & 0xff));
  out->push_back(static_cast<char>((v >> 16) & 0xff));
  out->push_back(static_cast<char>((v >> 24) & 0xff));
}

uint32_t ReadU32(const std::string& s, size_t* pos, const std::string& origin) {
  Check(*pos + 4 <= s.size(), ErrorKind::kIncompatibleCheckpoint, "truncated checkpoint: " + origin);
  const auto* p = reinterpret_cast<const unsigned char*>(s.data() + *pos);
  *pos += 4;
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

}  // namespace

std::string SerializeParams(const nn::ParamSet<float>& params) {
  std::string out(kMagic, 4);
  AppendU32(&out, kVersion);
  AppendU32(&out, static_cast<uint32_t>(params.items().size()));
  for (const auto* t : params.items()) {
    AppendU32(&out, static_cast<uint32_t>(t->name.size()));
    out += t->name;
    AppendU32(&out, static_cast<uint32_t>(t->value.rows()));
    AppendU32(&out, static_cast<uint32_t>(t->value.cols()));
    out.append(reinterpret_cast<const char*>(t->value.data()),
               sizeof(float) * static_cast<size_t>(t->value.size()));
  }
  return out;
}

void SaveParams(const nn::ParamSet<float>& params, const std::string& path) {
  WriteStringToFile(path, SerializeParams(params));
}

void LoadParamsFromString(nn::ParamSet<float>* params, const std::string& bytes,
                          const std::string& origin) {
  Check(bytes.size() >= 12 && std::memcmp(bytes.data(), kMagic, 4) == 0,
        ErrorKind::kIncompatibleCheckpoint, "not a weight file: " + origin);
  size_t pos = 4;
  uint32_t version = ReadU32(bytes, &pos, origin);
  Check(version == kVersion, ErrorKind::kIncompatibleCheckpoint,
        "unsupported weight file version in " + origin);
  uint32_t count = ReadU32(bytes, &pos, origin);
  Check(count == params->items().size(), ErrorKind::kIncompatibleCheckpoint,
        origin + ": tensor count mismatch (file " + std::to_string(count) + ", model " +
            std::to_string(params->items().size()) + ")");
  for (auto* t : params->items()) {
    uint32_t name_len = ReadU32(bytes, &pos, origin);
    Check(pos + name_len <= bytes.size(), ErrorKind::kIncompatibleCheckpoint,
          "truncated checkpoint: " + origin);
    std::string name = bytes.substr(pos, name_len);
    pos += name_len;
    uint32_t rows = ReadU32(bytes, &pos, origin);
    uint32_t cols = ReadU32(bytes, &pos, origin);
    Check(name == t->name, ErrorKind::kIncompatibleCheckpoint,
          origin + ": tensor name mismatch, expected " + t->name + ", found " + name);
    Check(rows == static_cast<uint32_t>(t->value.rows()) &&
              cols == static_cast<uint32_t>(t->value.cols()),
          ErrorKind::kIncompatibleCheckpoint, origin + ": shape mismatch for tensor " + name);
    size_t nbytes = sizeof(float) * static_cast<size_t>(rows) * cols;
    Check(pos + nbytes <= bytes.size(), ErrorKind::kIncompatibleCheckpoint,
          "truncated checkpoint: " + origin);
    std::memcpy(t->value.data(), bytes.data() + pos, nbytes);
    pos += nbytes;
  }
}

void LoadParams(nn::ParamSet<float>* params, const std::string& path) {
  LoadParamsFromString(params, ReadFileToString(path), path);
}

std::string MetaPathFor(const std::string& ckpt_path) {
  auto dot = ckpt_path.find_last_of('.');
  auto slash = ckpt_path.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
    return ckpt_path + ".meta.json";
  }
  return ckpt_path.substr(0, dot) + ".meta.json";
}

}  // namespace ced

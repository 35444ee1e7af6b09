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

#include "ced/common.h"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace ced {

namespace fs = std::filesystem;

const char* ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput: return "invalid-input";
    case ErrorKind::kUnsupportedFormat: return "unsupported-format";
    case ErrorKind::kOov: return "oov";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kIncompatibleCheckpoint: return "incompatible-checkpoint";
    case ErrorKind::kIncompatibleBundle: return "incompatible-bundle";
    case ErrorKind::kCoverage: return "coverage";
    case ErrorKind::kAlignmentInfeasible: return "alignment-infeasible";
    case ErrorKind::kGenerationFailed: return "generation-failed";
    case ErrorKind::kInternal: return "internal-consistency";
  }
  return "unknown";
}

void LogInfo(const std::string& msg) { std::fprintf(stderr, "[ced] %s\n", msg.c_str()); }
void LogWarn(const std::string& msg) { std::fprintf(stderr, "[ced] WARNING: %s\n", msg.c_str()); }

uint64_t Fnv1a64(const void* data, size_t len, uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  uint64_t h = seed;
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string HashToHex(uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

std::string HashFile(const std::string& path) {
  std::string bytes = ReadFileToString(path);
  return HashToHex(Fnv1a64(bytes.data(), bytes.size()));
}

std::string HashString(const std::string& s) {
  return HashToHex(Fnv1a64(s.data(), s.size()));
}

uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t Rng::UniformInt(uint64_t n) {
  if (n == 0) Throw(ErrorKind::kInvalidInput, "UniformInt: n must be >= 1");
  while (true) {
    uint64_t x = engine_();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    uint64_t low = static_cast<uint64_t>(m);
    if (low < n) {
      uint64_t threshold = (0ULL - n) % n;
      if (low < threshold) continue;
    }
    return static_cast<uint64_t>(m >> 64);
  }
}

double Rng::Gauss() {
  double u1 = UniformDouble();
  double u2 = UniformDouble();
  // Guard against log(0).
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::vector<int> Rng::SampleWithoutReplacement(int n, int k) {
  Check(k <= n, ErrorKind::kInvalidInput, "sample size exceeds population");
  std::vector<int> pool(n);
  for (int i = 0; i < n; ++i) pool[i] = i;
  std::vector<int> out;
  out.reserve(k);
  for (int i = 0; i < k; ++i) {
    size_t j = static_cast<size_t>(UniformInt(pool.size()));
    out.push_back(pool[j]);
    pool[j] = pool.back();
    pool.pop_back();
  }
  return out;
}

std::string ReadFileToString(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Throw(ErrorKind::kIo, "cannot open file for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteStringToFile(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Throw(ErrorKind::kIo, "cannot open file for writing: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) Throw(ErrorKind::kIo, "write failed: " + path);
}

bool FileExists(const std::string& path) {
  std::error_code ec;
  return fs::exists(path, ec);
}

void EnsureDir(const std::string& path) {
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec) Throw(ErrorKind::kIo, "cannot create directory " + path + ": " + ec.message());
}

std::string DirName(const std::string& path) {
  fs::path p(path);
  return p.parent_path().string();
}

std::string JoinPath(const std::string& a, const std::string& b) {
  if (a.empty()) return b;
  return (fs::path(a) / b).string();
}

std::string ResolvePath(const std::string& path) {
  if (path.empty()) return path;
  if (fs::path(path).is_absolute()) return path;
  const char* workdir = std::getenv("CED_WORKDIR");
  if (workdir == nullptr || workdir[0] == '\0') return path;
  return JoinPath(workdir, path);
}

std::string ToLower(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<std::string> SplitWhitespace(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream ss(s);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

std::string JoinStrings(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace ced

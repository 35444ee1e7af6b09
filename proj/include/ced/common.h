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

#ifndef CED_COMMON_H_
#define CED_COMMON_H_

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace ced {

enum class ErrorKind {
  kInvalidInput,
  kUnsupportedFormat,
  kOov,
  kIo,
  kIncompatibleCheckpoint,
  kIncompatibleBundle,
  kCoverage,
  kAlignmentInfeasible,
  kGenerationFailed,
  kInternal,
};

// All recoverable failures surface as CedError; the CLI maps them to exit
// code 2 (usage errors from the argument parser map to 1).
class CedError : public std::runtime_error {
 public:
  CedError(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

const char* ErrorKindName(ErrorKind kind);

[[noreturn]] inline void Throw(ErrorKind kind, const std::string& msg) {
  throw CedError(kind, msg);
}

inline void Check(bool cond, ErrorKind kind, const std::string& msg) {
  if (!cond) Throw(kind, msg);
}

// stderr logging, single line per event.
void LogInfo(const std::string& msg);
void LogWarn(const std::string& msg);

// FNV-1a 64-bit, used for provenance hashes (vocabulary, manifests,
// checkpoints). Not cryptographic; collisions are acceptable for the
// compatibility checks it backs.
uint64_t Fnv1a64(const void* data, size_t len, uint64_t seed = 0xcbf29ce484222325ULL);
std::string HashToHex(uint64_t h);
std::string HashFile(const std::string& path);
std::string HashString(const std::string& s);

uint64_t SplitMix64(uint64_t x);

// Deterministic random source. std::mt19937_64 output is fully specified by
// the standard; all derived draws below avoid implementation-defined
// <random> distributions so artifacts reproduce across toolchains.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(SplitMix64(seed)) {}

  uint64_t NextU64() { return engine_(); }

  // Uniform integer in [0, n), n >= 1. Lemire's multiply-shift rejection.
  uint64_t UniformInt(uint64_t n);

  // Uniform integer in [lo, hi] inclusive.
  int64_t UniformRange(int64_t lo, int64_t hi) {
    return lo + static_cast<int64_t>(UniformInt(static_cast<uint64_t>(hi - lo + 1)));
  }

  // Uniform double in [0, 1).
  double UniformDouble() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller. Draws two uniforms per call and discards
  // the spare so the consumption pattern stays call-count deterministic.
  double Gauss();

  template <typename T>
  void Shuffle(std::vector<T>* v) {
    for (size_t i = v->size(); i > 1; --i) {
      size_t j = static_cast<size_t>(UniformInt(i));
      std::swap((*v)[i - 1], (*v)[j]);
    }
  }

  // Sample k distinct indices from [0, n) in selection order.
  std::vector<int> SampleWithoutReplacement(int n, int k);

 private:
  std::mt19937_64 engine_;
};

// File helpers.
std::string ReadFileToString(const std::string& path);
void WriteStringToFile(const std::string& path, const std::string& content);
bool FileExists(const std::string& path);
void EnsureDir(const std::string& path);
std::string DirName(const std::string& path);
std::string JoinPath(const std::string& a, const std::string& b);

// Resolves a path against CED_WORKDIR when the path is relative and the
// variable is set. CED_WORKDIR is the only environment input the tools read.
std::string ResolvePath(const std::string& path);

std::string ToLower(const std::string& s);
std::vector<std::string> SplitWhitespace(const std::string& s);
std::string JoinStrings(const std::vector<std::string>& parts, const std::string& sep);

}  // namespace ced

#endif  // CED_COMMON_H_

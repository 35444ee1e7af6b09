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

#ifndef CED_CHECKPOINT_H_
#define CED_CHECKPOINT_H_

#include <string>

#include "ced/nn.h"

namespace ced {

// Weight files hold named float32 tensors and round-trip bit-exactly:
// magic 'CEDW', version, tensor count, then per tensor
// name_len|name|rows|cols|row-major float32 data (all integers LE u32).
std::string SerializeParams(const nn::ParamSet<float>& params);
void SaveParams(const nn::ParamSet<float>& params, const std::string& path);
// Names and shapes must match the registered set; anything else is an
// incompatible-checkpoint error.
void LoadParamsFromString(nn::ParamSet<float>* params, const std::string& bytes,
                          const std::string& origin);
void LoadParams(nn::ParamSet<float>* params, const std::string& path);

inline std::string ParamsHash(const nn::ParamSet<float>& params) {
  std::string bytes = SerializeParams(params);
  return HashToHex(Fnv1a64(bytes.data(), bytes.size()));
}

// encoder.ckpt -> encoder.meta.json
std::string MetaPathFor(const std::string& ckpt_path);

}  // namespace ced

#endif  // CED_CHECKPOINT_H_

// Copyright 2026 The CDLM Workbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// Self-describing checkpoint container.
//
// Layout: 8-byte magic "CDLMCKPT", uint32 format version, uint64 header
// length, a JSON header, zero padding to a 64-byte boundary, then raw
// little-endian float32 data. The header records the model config, one
// directory entry (name, shape, offset in floats) per parameter tensor, the
// optimizer state tensors, the step counter and free-form metadata.

#ifndef CDLM_CHECKPOINT_H_
#define CDLM_CHECKPOINT_H_

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "cdlm/train.h"
#include "cdlm/transformer.h"

namespace cdlm {

inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Checkpoint {
  ModelConfig config;
  std::vector<float> params;
  bool has_optimizer = false;
  AdamWState optimizer;
  std::int64_t step = 0;
  nlohmann::json metadata = nlohmann::json::object();
};

// Writes atomically (temporary file, then rename).
void SaveCheckpoint(const std::string& path, const Transformer<float>& model,
                    const AdamWState* optimizer, std::int64_t step,
                    const nlohmann::json& metadata);

// Throws CheckpointError on a malformed or truncated file.
Checkpoint LoadCheckpoint(const std::string& path);

// Model with the checkpoint's config and parameters.
Transformer<float> ModelFromCheckpoint(const Checkpoint& ckpt);

}  // namespace cdlm

#endif  // CDLM_CHECKPOINT_H_

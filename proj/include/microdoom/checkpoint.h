// Copyright 2026 The Microdoom Authors.
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

#ifndef MICRODOOM_CHECKPOINT_H_
#define MICRODOOM_CHECKPOINT_H_

// Layout: u64 little-endian header length, JSON header, then each tensor as
// raw little-endian float32 in manifest order.

#include <string>

#include "json.hpp"
#include "microdoom/doom_encoder.h"

namespace microdoom {

inline constexpr const char* kCheckpointFormat = "microdoom-ckpt";
inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  ModelConfig config;
  ModelParams params;
  nlohmann::json metadata = nlohmann::json::object();
};

std::string SerializeCheckpoint(const Checkpoint& ckpt);
Checkpoint DeserializeCheckpoint(const std::string& bytes);

// kIo on filesystem errors, kCheckpoint on malformed content.
void SaveCheckpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint LoadCheckpoint(const std::string& path);

}  // namespace microdoom

#endif  // MICRODOOM_CHECKPOINT_H_

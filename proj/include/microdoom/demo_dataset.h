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

#ifndef MICRODOOM_DEMO_DATASET_H_
#define MICRODOOM_DEMO_DATASET_H_

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "microdoom/actions.h"
#include "microdoom/arena.h"
#include "microdoom/frame_codec.h"

namespace microdoom {

inline constexpr float kHighScore = 0.85f;
inline constexpr float kLowScore = 0.05f;
inline constexpr const char* kDemoExtension = ".demo.jsonl";

struct DemoMeta {
  int64_t episode = 0;
  int64_t tic = 0;
  std::string source = "expert";  // "human" or "expert"
  bool operator==(const DemoMeta&) const = default;
};

struct DemoRecord {
  std::string ascii;                 // 1,024 characters, newline-joined rows
  std::array<uint8_t, kFrameCells> depth_bins{};
  std::array<float, 4> soft_scores{};
  DemoMeta meta;

  static DemoRecord FromFrame(const AsciiFrame& frame, const DepthGrid& depth,
                              const std::array<float, 4>& scores, DemoMeta meta);
  AsciiFrame Frame() const;
  DepthGrid Depth() const;
  bool operator==(const DemoRecord&) const = default;
};

struct DatasetSplit {
  std::vector<DemoRecord> train;
  std::vector<DemoRecord> val;
  uint64_t seed = 0;
};

// 0.85 for held buttons, 0.05 otherwise. Throws kEmptyButtons.
std::array<float, 4> SoftScores(ButtonSet buttons);

// Argmax with ties to the lowest index.
int HardLabel(const std::array<float, 4>& scores);

nlohmann::json RecordToJson(const DemoRecord& r);
// Throws kSchema (without line information).
DemoRecord RecordFromJson(const nlohmann::json& j);

void WriteJsonl(const std::vector<DemoRecord>& records, const std::string& path);
// kIo if unreadable; kSchema naming the 1-based line on malformed input.
std::vector<DemoRecord> ReadJsonl(const std::string& path);

// Seeded shuffle, then the first round(val_fraction * N) go to validation.
// Throws kTooFewRecords below 10 records.
DatasetSplit Split(std::vector<DemoRecord> records, uint64_t seed, double val_fraction = 0.1);

// Deterministic Fisher-Yates order of [0, n).
std::vector<size_t> SeededPermutation(size_t n, uint64_t seed);

// Plays the scripted expert closed-loop for `episodes` episodes seeded
// seed, seed+1, ... and records every decision it takes.
std::vector<DemoRecord> GenerateExpertDemos(int episodes, uint64_t seed,
                                            const EpisodeConfig& config = {});

}  // namespace microdoom

#endif  // MICRODOOM_DEMO_DATASET_H_

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

#ifndef MICRODOOM_CHAR_TOKENIZER_H_
#define MICRODOOM_CHAR_TOKENIZER_H_

// Character-level tokenizer: one token per frame character, so token index
// and screen position stay in a fixed one-to-one relation.
//
// Id layout (75 entries):
//    0- 4  [PAD] [CLS] [SEP] [UNK] [MASK]
//    5-14  brightness palette " .:-=+*#%@"
//   15     newline
//   16-22  entity markers "EIHAWDX"
//   23-48  a-z
//   49-58  0-9
//   59-68  punctuation fillers !"'(),/;?_
//   69-74  [ACT_SHOOT] [ACT_FORWARD] [ACT_LEFT] [ACT_RIGHT] [ACT_NONE] [ACT_MULTI]

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "microdoom/frame_codec.h"

namespace microdoom {

inline constexpr int kVocabSize = 75;
inline constexpr int kPadId = 0;
inline constexpr int kClsId = 1;
inline constexpr int kSepId = 2;
inline constexpr int kUnkId = 3;
inline constexpr int kMaskId = 4;
inline constexpr int kNewlineId = 15;
// Depth bin carried by [CLS], [PAD], newline and other position-less tokens.
inline constexpr int kSpecialDepthBin = 16;
inline constexpr int kFrameSequenceLength = 1 + kSerializedFrameLength;  // 1,025

class Vocabulary {
 public:
  // The fixed table; identical in every process.
  static const Vocabulary& Get();

  int size() const { return static_cast<int>(id_to_token_.size()); }
  std::optional<int> IdOf(std::string_view token) const;
  // -1 if the character has no token.
  int IdOfChar(char c) const { return char_to_id_[static_cast<unsigned char>(c)]; }
  const std::string& TokenOf(int id) const;
  // Specials and the newline carry no screen position.
  bool IsPositionless(int id) const;

  nlohmann::json ToJson() const;

 private:
  Vocabulary();
  std::vector<std::string> id_to_token_;
  std::array<int, 256> char_to_id_;
};

struct TokenSequence {
  std::vector<int> ids;
  std::vector<int> depth_bins;  // [0, 16] aligned with ids

  size_t size() const { return ids.size(); }
};

// Index of the token for frame cell (row, col) in an encoded frame.
constexpr int TokenIndex(int row, int col) { return 1 + row * (kFrameCols + 1) + col; }

// [CLS] + row-major characters with newline tokens between rows.
TokenSequence Encode(const AsciiFrame& frame, const DepthGrid& depth);

// Lower-level: arbitrary text, one depth bin per non-newline character.
TokenSequence EncodeText(std::string_view text, std::span<const uint8_t> content_depth);

// Inverse of Encode. A leading [CLS] and any [PAD] are dropped; other specials
// are emitted by name.
std::string Decode(const TokenSequence& seq);

}  // namespace microdoom

#endif  // MICRODOOM_CHAR_TOKENIZER_H_

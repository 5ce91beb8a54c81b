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

#include "microdoom/char_tokenizer.h"

#include "microdoom/error.h"

namespace microdoom {

Vocabulary::Vocabulary() {
  id_to_token_ = {"[PAD]", "[CLS]", "[SEP]", "[UNK]", "[MASK]"};
  auto add_chars = [this](std::string_view chars) {
    for (char c : chars) id_to_token_.emplace_back(1, c);
  };
  add_chars(kPalette);
  add_chars("\n");
  add_chars("EIHAWDX");
  add_chars("abcdefghijklmnopqrstuvwxyz");
  add_chars("0123456789");
  add_chars("!\"'(),/;?_");
  for (const char* t : {"[ACT_SHOOT]", "[ACT_FORWARD]", "[ACT_LEFT]", "[ACT_RIGHT]",
                        "[ACT_NONE]", "[ACT_MULTI]"}) {
    id_to_token_.emplace_back(t);
  }
  char_to_id_.fill(-1);
  for (int id = 0; id < static_cast<int>(id_to_token_.size()); ++id) {
    if (id_to_token_[id].size() == 1) {
      char_to_id_[static_cast<unsigned char>(id_to_token_[id][0])] = id;
    }
  }
}

const Vocabulary& Vocabulary::Get() {
  static const Vocabulary* vocab = new Vocabulary();
  return *vocab;
}

std::optional<int> Vocabulary::IdOf(std::string_view token) const {
  if (token.size() == 1) {
    int id = IdOfChar(token[0]);
    if (id >= 0) return id;
    return std::nullopt;
  }
  for (int id = 0; id < size(); ++id) {
    if (id_to_token_[id] == token) return id;
  }
  return std::nullopt;
}

const std::string& Vocabulary::TokenOf(int id) const {
  if (id < 0 || id >= size()) Fail(ErrorKind::kInvalidId, "token id " + std::to_string(id));
  return id_to_token_[id];
}

bool Vocabulary::IsPositionless(int id) const {
  return id < 5 || id == kNewlineId || id >= 69;
}

nlohmann::json Vocabulary::ToJson() const { return nlohmann::json(id_to_token_); }

TokenSequence EncodeText(std::string_view text, std::span<const uint8_t> content_depth) {
  const Vocabulary& vocab = Vocabulary::Get();
  TokenSequence seq;
  seq.ids.reserve(text.size() + 1);
  seq.depth_bins.reserve(text.size() + 1);
  seq.ids.push_back(kClsId);
  seq.depth_bins.push_back(kSpecialDepthBin);
  size_t content = 0;
  for (char c : text) {
    const int id = vocab.IdOfChar(c);
    if (id < 0) {
      Fail(ErrorKind::kUnknownCharacter,
           "character code " + std::to_string(static_cast<unsigned char>(c)));
    }
    seq.ids.push_back(id);
    if (id == kNewlineId) {
      seq.depth_bins.push_back(kSpecialDepthBin);
    } else {
      if (content >= content_depth.size()) {
        Fail(ErrorKind::kShapeMismatch, "fewer depth bins than content characters");
      }
      const int bin = content_depth[content++];
      if (bin >= kNumDepthBins) Fail(ErrorKind::kBinOutOfRange, std::to_string(bin));
      seq.depth_bins.push_back(bin);
    }
  }
  if (content != content_depth.size()) {
    Fail(ErrorKind::kShapeMismatch, "more depth bins than content characters");
  }
  return seq;
}

TokenSequence Encode(const AsciiFrame& frame, const DepthGrid& depth) {
  return EncodeText(frame.Serialize(), depth.bins);
}

std::string Decode(const TokenSequence& seq) {
  const Vocabulary& vocab = Vocabulary::Get();
  std::string out;
  for (size_t i = 0; i < seq.ids.size(); ++i) {
    const int id = seq.ids[i];
    const std::string& tok = vocab.TokenOf(id);
    if (id == kPadId || (i == 0 && id == kClsId)) continue;
    out += tok;
  }
  return out;
}

}  // namespace microdoom

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

#include "microdoom/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "microdoom/actions.h"
#include "microdoom/char_tokenizer.h"
#include "microdoom/error.h"

namespace microdoom {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes little-endian");

nlohmann::json ActionOrder() {
  nlohmann::json order = nlohmann::json::array();
  for (Action a : kAllActions) order.push_back(std::string(ActionName(a)));
  return order;
}

}  // namespace

std::string SerializeCheckpoint(const Checkpoint& ckpt) {
  nlohmann::json manifest = nlohmann::json::array();
  uint64_t offset = 0;
  ckpt.params.ForEach([&](const std::string& name, const nn::Tensor& t) {
    const uint64_t nbytes = static_cast<uint64_t>(t.size()) * sizeof(float);
    manifest.push_back({{"name", name}, {"shape", t.shape()}, {"offset", offset}, {"nbytes", nbytes}});
    offset += nbytes;
  });
  nlohmann::json header = {
      {"format", kCheckpointFormat},
      {"version", kCheckpointVersion},
      {"config", ckpt.config.ToJson()},
      {"vocabulary", Vocabulary::Get().ToJson()},
      {"action_order", ActionOrder()},
      {"pooling", {{"include_cls", true}, {"include_newline", true}, {"mask_pad", true}}},
      {"tensors", manifest},
      {"metadata", ckpt.metadata},
  };
  const std::string text = header.dump();
  std::string out;
  out.reserve(8 + text.size() + offset);
  const uint64_t len = text.size();
  out.append(reinterpret_cast<const char*>(&len), 8);
  out += text;
  ckpt.params.ForEach([&](const std::string&, const nn::Tensor& t) {
    out.append(reinterpret_cast<const char*>(t.data()), t.size() * sizeof(float));
  });
  return out;
}

Checkpoint DeserializeCheckpoint(const std::string& bytes) {
  if (bytes.size() < 8) Fail(ErrorKind::kCheckpoint, "truncated checkpoint");
  uint64_t len = 0;
  std::memcpy(&len, bytes.data(), 8);
  if (len > bytes.size() - 8) Fail(ErrorKind::kCheckpoint, "header length exceeds file size");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(8, len));
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kCheckpoint, std::string("bad header: ") + e.what());
  }
  if (header.value("format", "") != kCheckpointFormat) {
    Fail(ErrorKind::kCheckpoint, "not a microdoom checkpoint");
  }
  if (header.value("version", 0) != kCheckpointVersion) {
    Fail(ErrorKind::kCheckpoint, "unsupported checkpoint version");
  }
  if (header.value("action_order", nlohmann::json()) != ActionOrder()) {
    Fail(ErrorKind::kCheckpoint, "action order differs from this build");
  }
  if (header.value("vocabulary", nlohmann::json()) != Vocabulary::Get().ToJson()) {
    Fail(ErrorKind::kCheckpoint, "vocabulary differs from this build");
  }
  Checkpoint ckpt;
  ckpt.config = ModelConfig::FromJson(header.at("config"));
  ckpt.metadata = header.value("metadata", nlohmann::json::object());
  ckpt.params = ModelParams::Zeros(ckpt.config);
  const auto& manifest = header.at("tensors");
  const size_t data_start = 8 + len;
  size_t i = 0;
  ckpt.params.ForEach([&](const std::string& name, nn::Tensor& t) {
    if (i >= manifest.size()) Fail(ErrorKind::kCheckpoint, "manifest is missing " + name);
    const auto& entry = manifest[i++];
    if (entry.at("name").get<std::string>() != name ||
        entry.at("shape").get<std::vector<int>>() != t.shape()) {
      Fail(ErrorKind::kCheckpoint, "manifest entry mismatch at " + name);
    }
    const uint64_t off = entry.at("offset").get<uint64_t>();
    const uint64_t nbytes = entry.at("nbytes").get<uint64_t>();
    if (nbytes != t.size() * sizeof(float) || data_start + off + nbytes > bytes.size()) {
      Fail(ErrorKind::kCheckpoint, "tensor data out of bounds: " + name);
    }
    std::memcpy(t.data(), bytes.data() + data_start + off, nbytes);
  });
  if (i != manifest.size()) Fail(ErrorKind::kCheckpoint, "manifest has extra tensors");
  return ckpt;
}

void SaveCheckpoint(const std::string& path, const Checkpoint& ckpt) {
  const std::string bytes = SerializeCheckpoint(ckpt);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorKind::kIo, "cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) Fail(ErrorKind::kIo, "write failed: " + path);
}

Checkpoint LoadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kIo, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return DeserializeCheckpoint(ss.str());
}

}  // namespace microdoom

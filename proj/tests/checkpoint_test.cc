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

#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>

#include "microdoom/error.h"

namespace microdoom {
namespace {

ErrorKind KindOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::kInvalidArgument;  // nothing thrown
}

nlohmann::json HeaderOf(const std::string& bytes) {
  uint64_t len = 0;
  std::memcpy(&len, bytes.data(), 8);
  return nlohmann::json::parse(bytes.substr(8, len));
}

std::string WithHeader(const std::string& bytes, const nlohmann::json& header) {
  uint64_t len = 0;
  std::memcpy(&len, bytes.data(), 8);
  const std::string h = header.dump();
  const uint64_t n = h.size();
  std::string out(8, '\0');
  std::memcpy(out.data(), &n, 8);
  return out + h + bytes.substr(8 + len);
}

TEST(CheckpointTest, FullModelSizeAndRoundTrip) {
  Checkpoint c{ModelConfig{}, InitModelParams(ModelConfig{}, 4), {{"note", "x"}}};
  const std::string bytes = SerializeCheckpoint(c);
  const double mb = bytes.size() / 1e6;
  EXPECT_GE(mb, 5.2);
  EXPECT_LE(mb, 5.6);
  EXPECT_GE(bytes.size(), 1319300u * 4);
  const Checkpoint back = DeserializeCheckpoint(bytes);
  EXPECT_EQ(back.config, c.config);
  EXPECT_EQ(back.metadata, c.metadata);
  std::vector<const nn::Tensor*> a;
  c.params.ForEach([&](const std::string&, const nn::Tensor& t) { a.push_back(&t); });
  size_t i = 0;
  back.params.ForEach([&](const std::string&, const nn::Tensor& t) {
    EXPECT_EQ(t.shape(), a[i]->shape());
    EXPECT_EQ(std::memcmp(t.data(), a[i]->data(), t.size() * sizeof(float)), 0);
    ++i;
  });
  EXPECT_EQ(SerializeCheckpoint(back), bytes);
}

TEST(CheckpointTest, HeaderContents) {
  Checkpoint c{ModelConfig::Reduced(), InitModelParams(ModelConfig::Reduced(), 1), {}};
  const nlohmann::json h = HeaderOf(SerializeCheckpoint(c));
  EXPECT_EQ(h["format"], kCheckpointFormat);
  EXPECT_EQ(h["version"], kCheckpointVersion);
  EXPECT_EQ(h["action_order"], (nlohmann::json{"shoot", "move_forward", "turn_left", "turn_right"}));
  EXPECT_EQ(h["vocabulary"].size(), 75u);
  EXPECT_EQ(h["pooling"]["include_cls"], true);
  EXPECT_EQ(h["pooling"]["mask_pad"], true);
  uint64_t offset = 0;
  for (const auto& t : h["tensors"]) {
    EXPECT_EQ(t["offset"].get<uint64_t>(), offset);
    offset += t["nbytes"].get<uint64_t>();
  }
  EXPECT_EQ(offset, static_cast<uint64_t>(c.params.ScalarCount()) * 4);
}

TEST(CheckpointTest, RejectsCorruption) {
  Checkpoint c{ModelConfig::Reduced(), InitModelParams(ModelConfig::Reduced(), 1), {}};
  const std::string bytes = SerializeCheckpoint(c);
  EXPECT_EQ(KindOf([&] { DeserializeCheckpoint(bytes.substr(0, 5)); }), ErrorKind::kCheckpoint);
  EXPECT_EQ(KindOf([&] { DeserializeCheckpoint(bytes.substr(0, bytes.size() - 4)); }), ErrorKind::kCheckpoint);
  nlohmann::json h = HeaderOf(bytes);
  h["action_order"][0] = "turn_left";
  EXPECT_EQ(KindOf([&] { DeserializeCheckpoint(WithHeader(bytes, h)); }), ErrorKind::kCheckpoint);
  h = HeaderOf(bytes);
  h["format"] = "other";
  EXPECT_EQ(KindOf([&] { DeserializeCheckpoint(WithHeader(bytes, h)); }), ErrorKind::kCheckpoint);
  h = HeaderOf(bytes);
  h["tensors"][2]["shape"] = {3};
  EXPECT_EQ(KindOf([&] { DeserializeCheckpoint(WithHeader(bytes, h)); }), ErrorKind::kCheckpoint);
  h = HeaderOf(bytes);
  h["vocabulary"][7] = "?";
  EXPECT_EQ(KindOf([&] { DeserializeCheckpoint(WithHeader(bytes, h)); }), ErrorKind::kCheckpoint);
}

TEST(CheckpointTest, FileIo) {
  const std::string path = (std::filesystem::temp_directory_path() / "microdoom_ck_test.ckpt").string();
  Checkpoint c{ModelConfig::Reduced(), InitModelParams(ModelConfig::Reduced(), 2), {{"epoch", 3}}};
  SaveCheckpoint(path, c);
  EXPECT_EQ(LoadCheckpoint(path).metadata["epoch"], 3);
  std::filesystem::remove(path);
  EXPECT_EQ(KindOf([&] { LoadCheckpoint(path); }), ErrorKind::kIo);
  EXPECT_EQ(KindOf([&] { SaveCheckpoint("/nonexistent-dir/x.ckpt", c); }), ErrorKind::kIo);
}

}  // namespace
}  // namespace microdoom

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

#include "microdoom/doom_encoder.h"

#include <gtest/gtest.h>

#include <random>

#include "gradcheck.h"
#include "microdoom/error.h"

namespace microdoom {
namespace {

TEST(ParameterCountTest, FullModel) {
  const ModelParams p = InitModelParams(ModelConfig{}, 0);
  const ParameterCounts c = CountParameters(p);
  EXPECT_EQ(c.embeddings, 4480);
  EXPECT_EQ(c.embeddings, 128 * 16 + 16 * 128 + 128 + 256);
  EXPECT_EQ(c.depth, 2176);
  EXPECT_EQ(c.transformer, 1312000);
  ASSERT_EQ(c.per_layer.size(), 5u);
  for (int64_t n : c.per_layer) EXPECT_EQ(n, 262400);
  EXPECT_EQ(c.head, 644);
  EXPECT_EQ(c.total, 1319300);
  EXPECT_EQ(p.ScalarCount(), 1319300);
}

TEST(ModelConfigTest, ValidateAndJson) {
  ModelConfig c;
  EXPECT_NO_THROW(c.Validate());
  EXPECT_EQ(ModelConfig::FromJson(c.ToJson()), c);
  ModelConfig bad = c;
  bad.heads = 3;
  EXPECT_THROW(bad.Validate(), Error);
  bad = c;
  bad.global_layers = {5};
  EXPECT_THROW(bad.Validate(), Error);
}

class EncoderTest : public ::testing::Test {
 protected:
  EncoderTest() : model_(ModelConfig::Reduced(), InitModelParams(ModelConfig::Reduced(), 3)) {}
  static std::pair<AsciiFrame, DepthGrid> RandomFrame(uint64_t seed) {
    std::mt19937_64 rng(seed);
    AsciiFrame f;
    DepthGrid d;
    for (int r = 0; r < 25; ++r)
      for (int c = 0; c < 40; ++c) {
        f.set(r, c, kPalette[rng() % 10]);
        d.at(r, c) = rng() % 16;
      }
    return {f, d};
  }
  DoomEncoder model_;
};

TEST_F(EncoderTest, HashEmbedRows) {
  std::vector<int> ids = {5, 9, 5};
  const nn::Matrix e = model_.HashEmbed(ids);
  EXPECT_EQ(e.row(0), e.row(2));
  // gamma = 1, beta = 0 at init: rows are already zero-mean.
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(e.row(i).mean(), 0.0f, 1e-5);
  std::vector<int> bad = {75};
  try {
    model_.HashEmbed(bad);
    FAIL();
  } catch (const Error& e2) {
    EXPECT_EQ(e2.kind(), ErrorKind::kIdOutOfRange);
  }
}

TEST_F(EncoderTest, EmbedIsAdditive) {
  const auto [f, d] = RandomFrame(1);
  const TokenSequence s = Encode(f, d);
  ModelParams p = model_.params();
  p.depth_table.SetZero();
  DoomEncoder zero_depth(model_.config(), p);
  EXPECT_LT((zero_depth.Embed(s) - model_.HashEmbed(s.ids)).cwiseAbs().maxCoeff(), 1e-6f);
  const nn::Matrix full = model_.Embed(s);
  const nn::Matrix hash = model_.HashEmbed(s.ids);
  for (size_t i = 0; i < s.size(); ++i) {
    const nn::Matrix diff = full.row(i) - hash.row(i);
    EXPECT_LT((diff - model_.params().depth_table.mat().row(s.depth_bins[i])).cwiseAbs().maxCoeff(), 1e-6f);
  }
  TokenSequence bad = s;
  bad.depth_bins[3] = 17;
  try {
    model_.Embed(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kBinOutOfRange);
  }
}

TEST_F(EncoderTest, ResidualIdentityWhenBlocksZeroed) {
  ModelParams p = model_.params();
  for (auto& l : p.layers) {
    l.wo.SetZero();
    l.w_out.SetZero();
  }
  DoomEncoder m(model_.config(), p);
  const auto [f, d] = RandomFrame(2);
  const nn::Matrix e = m.Embed(Encode(f, d));
  const nn::Matrix h = m.EncodeSequence(e);
  EXPECT_EQ(h.rows(), e.rows());
  EXPECT_EQ(h.cols(), e.cols());
  EXPECT_LT((h - e).cwiseAbs().maxCoeff(), 1e-6f);
  try {
    m.EncodeSequence(nn::Matrix::Zero(1026, 16));
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::kSequenceTooLong);
  }
}

TEST_F(EncoderTest, AttentionPool) {
  std::mt19937 rng(4);
  nn::Matrix h = nn::Matrix::Random(5, 16);
  std::vector<uint8_t> one = {0, 0, 1, 0, 0};
  EXPECT_LT((model_.AttentionPool(h, one) - h.row(2).transpose()).cwiseAbs().maxCoeff(), 1e-6f);
  ModelParams p = model_.params();
  p.pool_vector.SetZero();
  DoomEncoder m(model_.config(), p);
  std::vector<uint8_t> mask = {1, 1, 0, 1, 1};
  std::vector<float> alpha;
  const nn::VectorT<float> v = m.AttentionPool(h, mask, &alpha);
  const nn::VectorT<float> mean = (h.row(0) + h.row(1) + h.row(3) + h.row(4)).transpose() / 4.0f;
  EXPECT_LT((v - mean).cwiseAbs().maxCoeff(), 1e-6f);
  EXPECT_EQ(alpha[2], 0.0f);
  std::vector<uint8_t> none(5, 0);
  try {
    m.AttentionPool(h, none);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kAllMasked);
  }
}

TEST_F(EncoderTest, Classify) {
  nn::VectorT<float> zero = nn::VectorT<float>::Zero(16);
  const auto logits = model_.Classify(zero);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(logits[i], model_.params().classifier_bias[i]);
  ModelParams p = model_.params();
  p.classifier_weight.SetZero();
  p.classifier_bias.SetZero();
  DoomEncoder m(model_.config(), p);
  const auto [f, d] = RandomFrame(5);
  for (float q : m.Forward(f, d)) EXPECT_FLOAT_EQ(q, 0.25f);
}

TEST_F(EncoderTest, ForwardIsDistributionAndDeterministic) {
  const auto [f, d] = RandomFrame(6);
  const auto p = model_.Forward(f, d);
  double s = 0;
  for (float v : p) {
    EXPECT_GT(v, 0.0f);
    EXPECT_LT(v, 1.0f);
    s += v;
  }
  EXPECT_NEAR(s, 1.0, 1e-6);
  DoomEncoder again(ModelConfig::Reduced(), InitModelParams(ModelConfig::Reduced(), 3));
  EXPECT_EQ(again.Forward(f, d), p);
}

TEST_F(EncoderTest, SensitiveToDepthAndRowOrder) {
  const auto [f, d] = RandomFrame(7);
  const auto base = model_.ForwardLogits(Encode(f, d));
  DepthGrid d2 = d;
  d2.at(12, 20) = (d2.at(12, 20) + 8) % 16;
  EXPECT_NE(model_.ForwardLogits(Encode(f, d2)), base);
  auto rows = f.rows();
  std::swap(rows[3], rows[17]);
  ASSERT_NE(rows[3], rows[17]);
  std::array<std::string, 25> swapped;
  std::copy(rows.begin(), rows.end(), swapped.begin());
  EXPECT_NE(model_.ForwardLogits(Encode(AsciiFrame::FromRows(swapped), d)), base);
}

TEST_F(EncoderTest, BackwardNeedsForward) {
  ForwardCacheT<float> cache;
  ModelParams g = ModelParams::Zeros(model_.config());
  try {
    model_.Backward(cache, {0, 0, 0, 0}, &g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNoForwardRecorded);
  }
}

TEST_F(EncoderTest, ShapeMismatchRejected) {
  ModelParams p = model_.params();
  p.layers[0].wq = nn::Tensor({16, 15});
  EXPECT_THROW(DoomEncoder(model_.config(), p), Error);
}

TEST(GradientCheckTest, EveryGroupMatchesFiniteDifferences) {
  for (const auto& g : testing::RunGradcheck(ModelConfig::Reduced(), 11)) {
    EXPECT_LT(g.rel_error, 1e-3) << g.name;
    EXPECT_GT(g.max_abs_analytic, 0.0) << g.name << " carries no gradient";
  }
}

}  // namespace
}  // namespace microdoom

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

#ifndef MICRODOOM_DOOM_ENCODER_H_
#define MICRODOOM_DOOM_ENCODER_H_

// The frame classifier: hash token embedding + additive depth embedding,
// pre-norm transformer blocks alternating global and sliding-window
// attention (RoPE on q/k), learned attention pooling and a linear head.
//
// Tensor conventions: activations are row-per-token; weight matrices map
// row vectors (y = x * W) except the classifier, which is y = W_c v + b_c.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "microdoom/char_tokenizer.h"
#include "microdoom/frame_codec.h"
#include "microdoom/nn_ops.h"
#include "microdoom/tensor.h"

namespace microdoom {

struct ModelConfig {
  int hidden = 128;
  int layers = 5;
  int heads = 2;
  int head_dim = 64;
  int intermediate = 512;
  int vocab = kVocabSize;
  int hash_table_rows = 128;
  int hash_proj = 16;
  int depth_bins = 17;
  int window = 128;
  std::vector<int> global_layers = {0, 3};
  int actions = 4;
  int max_seq = kFrameSequenceLength;
  float norm_eps = 1e-5f;
  double rope_base = 10000.0;

  // 2 layers, hidden 16, short sequences; used for gradient checks and fast tests.
  static ModelConfig Reduced();

  bool IsGlobalLayer(int layer) const;
  void Validate() const;
  nlohmann::json ToJson() const;
  static ModelConfig FromJson(const nlohmann::json& j);
  bool operator==(const ModelConfig&) const = default;
};

template <typename T>
struct LayerParamsT {
  nn::TensorT<T> wq, wk, wv, wo;  // hidden x hidden
  nn::TensorT<T> attn_norm;       // gamma only
  nn::TensorT<T> mlp_norm;        // gamma only
  nn::TensorT<T> w_in;            // hidden x 2*intermediate: [gelu half | gate half]
  nn::TensorT<T> w_out;           // intermediate x hidden
};

template <typename T>
struct ModelParamsT {
  nn::TensorT<T> hash_table;        // hash_table_rows x hash_proj
  nn::TensorT<T> hash_proj_weight;  // hash_proj x hidden
  nn::TensorT<T> hash_proj_bias;    // hidden
  nn::TensorT<T> embed_norm_gamma;  // hidden
  nn::TensorT<T> embed_norm_beta;   // hidden
  nn::TensorT<T> depth_table;       // depth_bins x hidden
  std::vector<LayerParamsT<T>> layers;
  nn::TensorT<T> pool_vector;        // hidden
  nn::TensorT<T> classifier_weight;  // actions x hidden
  nn::TensorT<T> classifier_bias;    // actions

  static ModelParamsT Zeros(const ModelConfig& config);

  // Visits every trainable tensor in a fixed order with a stable name.
  template <typename F>
  void ForEach(F&& f) {
    ForEachImpl(*this, f);
  }
  template <typename F>
  void ForEach(F&& f) const {
    ForEachImpl(*this, f);
  }

  template <typename U>
  ModelParamsT<U> Cast() const {
    ModelParamsT<U> out;
    out.layers.resize(layers.size());
    std::vector<const nn::TensorT<T>*> src;
    ForEach([&](const std::string&, const nn::TensorT<T>& t) { src.push_back(&t); });
    size_t i = 0;
    out.ForEach([&](const std::string&, nn::TensorT<U>& t) { t = src[i++]->template Cast<U>(); });
    return out;
  }

  int64_t ScalarCount() const {
    int64_t n = 0;
    ForEach([&](const std::string&, const nn::TensorT<T>& t) { n += t.size(); });
    return n;
  }

 private:
  template <typename Self, typename F>
  static void ForEachImpl(Self& self, F& f) {
    f("hash_table", self.hash_table);
    f("hash_proj.weight", self.hash_proj_weight);
    f("hash_proj.bias", self.hash_proj_bias);
    f("embed_norm.gamma", self.embed_norm_gamma);
    f("embed_norm.beta", self.embed_norm_beta);
    f("depth_table", self.depth_table);
    for (size_t l = 0; l < self.layers.size(); ++l) {
      auto& layer = self.layers[l];
      const std::string p = "layers." + std::to_string(l) + ".";
      f(p + "attn.wq", layer.wq);
      f(p + "attn.wk", layer.wk);
      f(p + "attn.wv", layer.wv);
      f(p + "attn.wo", layer.wo);
      f(p + "attn_norm.gamma", layer.attn_norm);
      f(p + "mlp_norm.gamma", layer.mlp_norm);
      f(p + "mlp.w_in", layer.w_in);
      f(p + "mlp.w_out", layer.w_out);
    }
    f("pool.w", self.pool_vector);
    f("classifier.weight", self.classifier_weight);
    f("classifier.bias", self.classifier_bias);
  }
};

using ModelParams = ModelParamsT<float>;

// N(0, 0.02) weights, unit norm scales, zero shifts/biases.
ModelParams InitModelParams(const ModelConfig& config, uint64_t seed);

struct ParameterCounts {
  int64_t embeddings = 0;
  int64_t depth = 0;
  int64_t transformer = 0;
  std::vector<int64_t> per_layer;
  int64_t head = 0;
  int64_t total = 0;
};

template <typename T>
ParameterCounts CountParameters(const ModelParamsT<T>& params);

// Everything Backward needs from one forward pass.
template <typename T>
struct LayerCacheT {
  nn::MatrixT<T> x_in;
  nn::LayerNormCache<T> ln1;
  nn::MatrixT<T> a;        // attn_norm(x_in)
  nn::MatrixT<T> q, k, v;  // q and k after RoPE
  std::vector<nn::AttentionCache<T>> heads;
  nn::MatrixT<T> o;        // concatenated head outputs
  nn::MatrixT<T> x1;
  nn::LayerNormCache<T> ln2;
  nn::MatrixT<T> b;        // mlp_norm(x1)
  nn::GegluCache<T> mlp;
};

template <typename T>
struct ForwardCacheT {
  bool recorded = false;
  std::vector<int> ids;
  std::vector<int> depth_bins;
  std::vector<int> positions;
  std::vector<uint8_t> content_mask;
  nn::LayerNormCache<T> embed_ln;
  std::vector<LayerCacheT<T>> layers;
  nn::MatrixT<T> hidden;  // final token states
  std::vector<T> alpha;
  nn::VectorT<T> pooled;
  std::array<T, 4> logits{};
};

using Logits = std::array<float, 4>;
using ActionProbs = std::array<float, 4>;

template <typename T>
class DoomEncoderT {
 public:
  DoomEncoderT(ModelConfig config, ModelParamsT<T> params);

  const ModelConfig& config() const { return config_; }
  const ModelParamsT<T>& params() const { return params_; }
  // Exclusive access required; do not mutate while other threads call Forward.
  ModelParamsT<T>& mutable_params() { return params_; }

  // One row per id: LayerNorm(hash_table[id] * P + bias).
  nn::MatrixT<T> HashEmbed(std::span<const int> ids) const;
  // HashEmbed + depth_table[bin].
  nn::MatrixT<T> Embed(const TokenSequence& seq, ForwardCacheT<T>* cache = nullptr) const;
  nn::MatrixT<T> EncodeSequence(const nn::MatrixT<T>& embedded,
                                ForwardCacheT<T>* cache = nullptr) const;
  // Softmax(w . h_i) over positions with content_mask[i] != 0.
  nn::VectorT<T> AttentionPool(const nn::MatrixT<T>& hidden, std::span<const uint8_t> content_mask,
                               std::vector<T>* alpha = nullptr) const;
  std::array<T, 4> Classify(const nn::VectorT<T>& pooled) const;

  // Full pass to logits. Passing a cache records what Backward needs.
  std::array<T, 4> ForwardLogits(const TokenSequence& seq,
                                 ForwardCacheT<T>* cache = nullptr) const;
  // Encode -> embed -> transformer -> pool -> classify -> softmax.
  std::array<T, 4> Forward(const AsciiFrame& frame, const DepthGrid& depth) const;

  // Accumulates d(loss)/d(param) into *grads given d(loss)/d(logits).
  void Backward(const ForwardCacheT<T>& cache, const std::array<T, 4>& dlogits,
                ModelParamsT<T>* grads) const;

 private:
  ModelConfig config_;
  ModelParamsT<T> params_;
  nn::RopeTable<T> rope_;
};

using DoomEncoder = DoomEncoderT<float>;

// [PAD] positions are excluded from pooling; everything else is included.
std::vector<uint8_t> ContentMask(const TokenSequence& seq);

}  // namespace microdoom

#endif  // MICRODOOM_DOOM_ENCODER_H_

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

#include <algorithm>
#include <cmath>
#include <random>

#include "microdoom/error.h"
#include "microdoom/gemm.h"

namespace microdoom {

using nn::MatrixT;
using nn::TensorT;
using nn::VectorT;

namespace {

// [wq | wk | wv], so the three projections run as one GEMM.
template <typename T>
MatrixT<T> FusedQkv(const LayerParamsT<T>& p) {
  const int h = static_cast<int>(p.wq.mat().rows());
  MatrixT<T> w(h, 3 * p.wq.mat().cols());
  w << p.wq.mat(), p.wk.mat(), p.wv.mat();
  return w;
}

}  // namespace

ModelConfig ModelConfig::Reduced() {
  ModelConfig c;
  c.hidden = 16;
  c.layers = 2;
  c.heads = 2;
  c.head_dim = 8;
  c.intermediate = 64;
  c.hash_proj = 8;
  c.window = 4;
  c.global_layers = {0};
  return c;
}

bool ModelConfig::IsGlobalLayer(int layer) const {
  return std::find(global_layers.begin(), global_layers.end(), layer) != global_layers.end();
}

void ModelConfig::Validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) Fail(ErrorKind::kInvalidArgument, "model config: " + what);
  };
  require(hidden == heads * head_dim, "hidden must equal heads * head_dim");
  require(head_dim % 2 == 0, "head_dim must be even");
  require(layers >= 1 && intermediate >= 1 && actions == 4, "bad sizes");
  require(vocab <= hash_table_rows, "identity bucketing needs vocab <= hash_table_rows");
  require(depth_bins == kSpecialDepthBin + 1, "depth_bins must be 17");
  for (int l : global_layers) require(l >= 0 && l < layers, "global layer out of range");
  require(max_seq >= 1 && window >= 0, "bad sequence settings");
}

nlohmann::json ModelConfig::ToJson() const {
  return {{"hidden", hidden},           {"layers", layers},
          {"heads", heads},             {"head_dim", head_dim},
          {"intermediate", intermediate}, {"vocab", vocab},
          {"hash_table_rows", hash_table_rows}, {"hash_proj", hash_proj},
          {"depth_bins", depth_bins},   {"window", window},
          {"global_layers", global_layers}, {"actions", actions},
          {"max_seq", max_seq},         {"norm_eps", norm_eps},
          {"rope_base", rope_base}};
}

ModelConfig ModelConfig::FromJson(const nlohmann::json& j) {
  ModelConfig c;
  try {
    c.hidden = j.at("hidden").get<int>();
    c.layers = j.at("layers").get<int>();
    c.heads = j.at("heads").get<int>();
    c.head_dim = j.at("head_dim").get<int>();
    c.intermediate = j.at("intermediate").get<int>();
    c.vocab = j.at("vocab").get<int>();
    c.hash_table_rows = j.at("hash_table_rows").get<int>();
    c.hash_proj = j.at("hash_proj").get<int>();
    c.depth_bins = j.at("depth_bins").get<int>();
    c.window = j.at("window").get<int>();
    c.global_layers = j.at("global_layers").get<std::vector<int>>();
    c.actions = j.at("actions").get<int>();
    c.max_seq = j.at("max_seq").get<int>();
    c.norm_eps = j.at("norm_eps").get<float>();
    c.rope_base = j.at("rope_base").get<double>();
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kCheckpoint, std::string("bad model config: ") + e.what());
  }
  c.Validate();
  return c;
}

template <typename T>
ModelParamsT<T> ModelParamsT<T>::Zeros(const ModelConfig& c) {
  c.Validate();
  ModelParamsT<T> p;
  p.hash_table = TensorT<T>({c.hash_table_rows, c.hash_proj});
  p.hash_proj_weight = TensorT<T>({c.hash_proj, c.hidden});
  p.hash_proj_bias = TensorT<T>({c.hidden});
  p.embed_norm_gamma = TensorT<T>({c.hidden});
  p.embed_norm_beta = TensorT<T>({c.hidden});
  p.depth_table = TensorT<T>({c.depth_bins, c.hidden});
  p.layers.resize(c.layers);
  for (auto& l : p.layers) {
    l.wq = TensorT<T>({c.hidden, c.hidden});
    l.wk = TensorT<T>({c.hidden, c.hidden});
    l.wv = TensorT<T>({c.hidden, c.hidden});
    l.wo = TensorT<T>({c.hidden, c.hidden});
    l.attn_norm = TensorT<T>({c.hidden});
    l.mlp_norm = TensorT<T>({c.hidden});
    l.w_in = TensorT<T>({c.hidden, 2 * c.intermediate});
    l.w_out = TensorT<T>({c.intermediate, c.hidden});
  }
  p.pool_vector = TensorT<T>({c.hidden});
  p.classifier_weight = TensorT<T>({c.actions, c.hidden});
  p.classifier_bias = TensorT<T>({c.actions});
  return p;
}

ModelParams InitModelParams(const ModelConfig& config, uint64_t seed) {
  ModelParams p = ModelParams::Zeros(config);
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> normal(0.0f, 0.02f);
  auto fill_normal = [&](nn::Tensor& t) {
    for (float& v : t.values()) v = normal(rng);
  };
  p.ForEach([&](const std::string& name, nn::Tensor& t) {
    const bool is_scale = name.ends_with(".gamma");
    const bool is_shift = name.ends_with(".beta") || name.ends_with(".bias");
    if (is_scale) {
      t.mat().setOnes();
    } else if (!is_shift) {
      fill_normal(t);
    }
  });
  return p;
}

template <typename T>
ParameterCounts CountParameters(const ModelParamsT<T>& p) {
  ParameterCounts c;
  c.embeddings = p.hash_table.size() + p.hash_proj_weight.size() + p.hash_proj_bias.size() +
                 p.embed_norm_gamma.size() + p.embed_norm_beta.size();
  c.depth = p.depth_table.size();
  for (const auto& l : p.layers) {
    const int64_t n = l.wq.size() + l.wk.size() + l.wv.size() + l.wo.size() +
                      l.attn_norm.size() + l.mlp_norm.size() + l.w_in.size() + l.w_out.size();
    c.per_layer.push_back(n);
    c.transformer += n;
  }
  c.head = p.pool_vector.size() + p.classifier_weight.size() + p.classifier_bias.size();
  c.total = c.embeddings + c.depth + c.transformer + c.head;
  return c;
}

std::vector<uint8_t> ContentMask(const TokenSequence& seq) {
  std::vector<uint8_t> mask(seq.size());
  for (size_t i = 0; i < seq.size(); ++i) mask[i] = seq.ids[i] != kPadId;
  return mask;
}

template <typename T>
DoomEncoderT<T>::DoomEncoderT(ModelConfig config, ModelParamsT<T> params)
    : config_(std::move(config)),
      params_(std::move(params)),
      rope_(config_.max_seq, config_.head_dim, config_.rope_base) {
  config_.Validate();
  // Shape check against the config.
  ModelParamsT<T> expected = ModelParamsT<T>::Zeros(config_);
  std::vector<std::vector<int>> shapes;
  expected.ForEach([&](const std::string&, const TensorT<T>& t) { shapes.push_back(t.shape()); });
  size_t i = 0;
  if (params_.layers.size() != static_cast<size_t>(config_.layers)) {
    Fail(ErrorKind::kShapeMismatch, "layer count disagrees with config");
  }
  params_.ForEach([&](const std::string& name, const TensorT<T>& t) {
    if (t.shape() != shapes[i++]) {
      Fail(ErrorKind::kShapeMismatch, name + " has shape " + t.ShapeString());
    }
  });
}

template <typename T>
MatrixT<T> DoomEncoderT<T>::HashEmbed(std::span<const int> ids) const {
  ForwardCacheT<T>* none = nullptr;
  TokenSequence seq;
  seq.ids.assign(ids.begin(), ids.end());
  seq.depth_bins.assign(ids.size(), kSpecialDepthBin);
  // Reuse Embed with the depth term removed.
  MatrixT<T> e = Embed(seq, none);
  e.rowwise() -= params_.depth_table.mat().row(kSpecialDepthBin);
  return e;
}

template <typename T>
MatrixT<T> DoomEncoderT<T>::Embed(const TokenSequence& seq, ForwardCacheT<T>* cache) const {
  const int n = static_cast<int>(seq.size());
  if (seq.depth_bins.size() != seq.ids.size()) {
    Fail(ErrorKind::kShapeMismatch, "ids and depth bins differ in length");
  }
  MatrixT<T> rows(n, config_.hash_proj);
  for (int i = 0; i < n; ++i) {
    const int id = seq.ids[i];
    if (id < 0 || id >= config_.vocab) {
      Fail(ErrorKind::kIdOutOfRange, "token id " + std::to_string(id));
    }
    const int bin = seq.depth_bins[i];
    if (bin < 0 || bin >= config_.depth_bins) {
      Fail(ErrorKind::kBinOutOfRange, "depth bin " + std::to_string(bin));
    }
    rows.row(i) = params_.hash_table.mat().row(id);  // identity bucketing
  }
  MatrixT<T> z(n, config_.hidden);
  nn::Gemm<T>(rows, false, params_.hash_proj_weight.mat(), false, z);
  z.rowwise() += params_.hash_proj_bias.mat().row(0);
  MatrixT<T> e;
  nn::LayerNormRows<T>(z, params_.embed_norm_gamma.data(), params_.embed_norm_beta.data(),
                       static_cast<T>(config_.norm_eps), &e,
                       cache ? &cache->embed_ln : nullptr);
  for (int i = 0; i < n; ++i) e.row(i) += params_.depth_table.mat().row(seq.depth_bins[i]);
  if (cache != nullptr) {
    cache->ids = seq.ids;
    cache->depth_bins = seq.depth_bins;
  }
  return e;
}

template <typename T>
MatrixT<T> DoomEncoderT<T>::EncodeSequence(const MatrixT<T>& embedded,
                                           ForwardCacheT<T>* cache) const {
  const int n = static_cast<int>(embedded.rows());
  const int hd = config_.head_dim;
  if (n > config_.max_seq) {
    Fail(ErrorKind::kSequenceTooLong, std::to_string(n) + " tokens > " +
                                           std::to_string(config_.max_seq));
  }
  if (embedded.cols() != config_.hidden) Fail(ErrorKind::kShapeMismatch, "hidden size mismatch");
  std::vector<int> positions(n);
  for (int i = 0; i < n; ++i) positions[i] = i;
  const nn::AttentionMask global_mask = nn::AttentionMask::Global(n);
  const nn::AttentionMask local_mask = nn::AttentionMask::SlidingWindow(n, config_.window);
  const T eps = static_cast<T>(config_.norm_eps);
  if (cache != nullptr) {
    cache->positions = positions;
    cache->layers.assign(config_.layers, {});
  }

  MatrixT<T> x = embedded;
  const int hidden = config_.hidden;
  MatrixT<T> a, qkv(n, 3 * hidden), q, k, v;
  MatrixT<T> o(n, hidden), qh, kh, vh, b;
  for (int l = 0; l < config_.layers; ++l) {
    const auto& p = params_.layers[l];
    LayerCacheT<T>* lc = cache ? &cache->layers[l] : nullptr;
    const nn::AttentionMask& mask = config_.IsGlobalLayer(l) ? global_mask : local_mask;

    nn::LayerNormRows<T>(x, p.attn_norm.data(), nullptr, eps, &a, lc ? &lc->ln1 : nullptr);
    const MatrixT<T> wqkv = FusedQkv(p);
    nn::Gemm<T>(a, false, wqkv, false, qkv);
    q = qkv.leftCols(hidden);
    k = qkv.middleCols(hidden, hidden);
    v = qkv.rightCols(hidden);
    if (lc) lc->heads.resize(config_.heads);
    for (int h = 0; h < config_.heads; ++h) {
      auto qb = q.middleCols(h * hd, hd);
      auto kb = k.middleCols(h * hd, hd);
      rope_.Apply(qb, positions);
      rope_.Apply(kb, positions);
      qh = qb;
      kh = kb;
      vh = v.middleCols(h * hd, hd);
      o.middleCols(h * hd, hd) = nn::Attention<T>(qh, kh, vh, mask, lc ? &lc->heads[h] : nullptr);
    }
    MatrixT<T> x1 = x;
    nn::Gemm<T>(o, false, p.wo.mat(), false, x1, true);
    nn::LayerNormRows<T>(x1, p.mlp_norm.data(), nullptr, eps, &b, lc ? &lc->ln2 : nullptr);
    MatrixT<T> mlp = nn::Geglu<T>(b, p.w_in.mat(), p.w_out.mat(), lc ? &lc->mlp : nullptr);
    if (lc) {
      lc->x_in = std::move(x);
      lc->a = a;
      lc->q = q;
      lc->k = k;
      lc->v = v;
      lc->o = o;
      lc->b = b;
      lc->x1 = x1;
    }
    x = std::move(x1);
    x += mlp;
  }
  return x;
}

template <typename T>
VectorT<T> DoomEncoderT<T>::AttentionPool(const MatrixT<T>& hidden,
                                          std::span<const uint8_t> content_mask,
                                          std::vector<T>* alpha) const {
  const int n = static_cast<int>(hidden.rows());
  if (content_mask.size() != static_cast<size_t>(n)) {
    Fail(ErrorKind::kShapeMismatch, "content mask length differs from token count");
  }
  VectorT<T> scores = hidden * params_.pool_vector.mat().row(0).transpose();
  T m = -std::numeric_limits<T>::infinity();
  for (int i = 0; i < n; ++i) {
    if (content_mask[i]) m = std::max(m, scores(i));
  }
  if (!std::isfinite(m)) Fail(ErrorKind::kAllMasked, "no unmasked position to pool");
  std::vector<T> w(n, T(0));
  T sum = 0;
  for (int i = 0; i < n; ++i) {
    if (content_mask[i]) {
      w[i] = std::exp(scores(i) - m);
      sum += w[i];
    }
  }
  for (T& x : w) x /= sum;
  VectorT<T> pooled = Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>(w.data(), n) * hidden;
  if (alpha != nullptr) *alpha = std::move(w);
  return pooled;
}

template <typename T>
std::array<T, 4> DoomEncoderT<T>::Classify(const VectorT<T>& pooled) const {
  VectorT<T> y = params_.classifier_weight.mat() * pooled;
  std::array<T, 4> out;
  for (int i = 0; i < 4; ++i) out[i] = y(i) + params_.classifier_bias[i];
  return out;
}

template <typename T>
std::array<T, 4> DoomEncoderT<T>::ForwardLogits(const TokenSequence& seq,
                                                ForwardCacheT<T>* cache) const {
  MatrixT<T> e = Embed(seq, cache);
  MatrixT<T> h = EncodeSequence(e, cache);
  std::vector<uint8_t> mask = ContentMask(seq);
  std::vector<T> alpha;
  VectorT<T> pooled = AttentionPool(h, mask, cache ? &alpha : nullptr);
  std::array<T, 4> logits = Classify(pooled);
  for (T v : logits) {
    if (!std::isfinite(v)) Fail(ErrorKind::kNonFinite, "non-finite logit");
  }
  if (cache != nullptr) {
    cache->content_mask = std::move(mask);
    cache->hidden = std::move(h);
    cache->alpha = std::move(alpha);
    cache->pooled = std::move(pooled);
    cache->logits = logits;
    cache->recorded = true;
  }
  return logits;
}

template <typename T>
std::array<T, 4> DoomEncoderT<T>::Forward(const AsciiFrame& frame, const DepthGrid& depth) const {
  std::array<T, 4> p = ForwardLogits(Encode(frame, depth));
  nn::SoftmaxInPlace<T>(p);
  return p;
}

template <typename T>
void DoomEncoderT<T>::Backward(const ForwardCacheT<T>& cache, const std::array<T, 4>& dlogits,
                               ModelParamsT<T>* grads) const {
  if (!cache.recorded) Fail(ErrorKind::kNoForwardRecorded, "Backward called without a forward");
  const int n = static_cast<int>(cache.ids.size());
  const int hd = config_.head_dim;
  const T* w = params_.pool_vector.data();
  Eigen::Map<const VectorT<T>> dy(dlogits.data(), 4);

  // Classifier.
  grads->classifier_weight.mat().noalias() += dy * cache.pooled.transpose();
  for (int i = 0; i < 4; ++i) grads->classifier_bias[i] += dlogits[i];
  VectorT<T> dv = params_.classifier_weight.mat().transpose() * dy;

  // Attention pooling.
  const auto& h = cache.hidden;
  MatrixT<T> dx = MatrixT<T>::Zero(n, config_.hidden);
  VectorT<T> dalpha = h * dv;
  T weighted = 0;
  for (int i = 0; i < n; ++i) weighted += cache.alpha[i] * dalpha(i);
  Eigen::Map<const VectorT<T>> wv(w, config_.hidden);
  Eigen::Map<VectorT<T>> dw(grads->pool_vector.data(), config_.hidden);
  for (int i = 0; i < n; ++i) {
    if (!cache.content_mask[i]) continue;
    const T ds = cache.alpha[i] * (dalpha(i) - weighted);
    dx.row(i) = cache.alpha[i] * dv.transpose() + ds * wv.transpose();
    dw += ds * h.row(i).transpose();
  }

  // Transformer blocks, last to first.
  const int hidden = config_.hidden;
  MatrixT<T> db, dx1, da, dqkv(n, 3 * hidden), dwqkv;
  MatrixT<T> d_o, qh, kh, vh, doh, dqh, dkh, dvh, tmp;
  for (int l = config_.layers - 1; l >= 0; --l) {
    const auto& p = params_.layers[l];
    auto& g = grads->layers[l];
    const auto& c = cache.layers[l];

    nn::GegluBackward<T>(c.b, p.w_in.mat(), p.w_out.mat(), c.mlp, dx, &db, &g.w_in.mat(),
                         &g.w_out.mat());
    nn::LayerNormRowsBackward<T>(c.ln2, db, p.mlp_norm.data(), &tmp, g.mlp_norm.data(), nullptr);
    dx1 = dx + tmp;

    nn::Gemm<T>(c.o, true, dx1, false, g.wo.mat(), true);
    d_o.resize(n, hidden);
    nn::Gemm<T>(dx1, false, p.wo.mat(), true, d_o);
    for (int hh = 0; hh < config_.heads; ++hh) {
      qh = c.q.middleCols(hh * hd, hd);
      kh = c.k.middleCols(hh * hd, hd);
      vh = c.v.middleCols(hh * hd, hd);
      doh = d_o.middleCols(hh * hd, hd);
      nn::AttentionBackward<T>(qh, kh, vh, c.heads[hh], doh, &dqh, &dkh, &dvh);
      rope_.Apply(dqh, cache.positions, /*inverse=*/true);
      rope_.Apply(dkh, cache.positions, /*inverse=*/true);
      dqkv.middleCols(hh * hd, hd) = dqh;
      dqkv.middleCols(hidden + hh * hd, hd) = dkh;
      dqkv.middleCols(2 * hidden + hh * hd, hd) = dvh;
    }
    dwqkv.resize(hidden, 3 * hidden);
    nn::Gemm<T>(c.a, true, dqkv, false, dwqkv);
    g.wq.mat() += dwqkv.leftCols(hidden);
    g.wk.mat() += dwqkv.middleCols(hidden, hidden);
    g.wv.mat() += dwqkv.rightCols(hidden);
    da.resize(n, hidden);
    nn::Gemm<T>(dqkv, false, FusedQkv(p), true, da);
    nn::LayerNormRowsBackward<T>(c.ln1, da, p.attn_norm.data(), &tmp, g.attn_norm.data(), nullptr);
    dx = dx1 + tmp;
  }

  // Embeddings.
  for (int i = 0; i < n; ++i) grads->depth_table.mat().row(cache.depth_bins[i]) += dx.row(i);
  MatrixT<T> dz;
  nn::LayerNormRowsBackward<T>(cache.embed_ln, dx, params_.embed_norm_gamma.data(), &dz,
                               grads->embed_norm_gamma.data(), grads->embed_norm_beta.data());
  grads->hash_proj_bias.mat().row(0) += dz.colwise().sum();
  MatrixT<T> rows(n, config_.hash_proj);
  for (int i = 0; i < n; ++i) rows.row(i) = params_.hash_table.mat().row(cache.ids[i]);
  nn::Gemm<T>(rows, true, dz, false, grads->hash_proj_weight.mat(), true);
  MatrixT<T> drows = nn::MatMul<T>(dz, false, params_.hash_proj_weight.mat(), true);
  for (int i = 0; i < n; ++i) grads->hash_table.mat().row(cache.ids[i]) += drows.row(i);
}

template struct ModelParamsT<float>;
template struct ModelParamsT<double>;
template ParameterCounts CountParameters<float>(const ModelParamsT<float>&);
template ParameterCounts CountParameters<double>(const ModelParamsT<double>&);
template class DoomEncoderT<float>;
template class DoomEncoderT<double>;

}  // namespace microdoom

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

#include "microdoom/nn_ops.h"

#include "microdoom/gemm.h"

#include <unsupported/Eigen/SpecialFunctions>

#include <algorithm>
#include <cmath>
#include <limits>

namespace microdoom::nn {
namespace {

constexpr int kAttentionRowBlock = 64;
constexpr int kGlobalRowBlock = 128;

template <typename Derived>
auto GeluArray(const Eigen::ArrayBase<Derived>& a) {
  using T = typename Derived::Scalar;
  return T(0.5) * a * (T(1) + (a * T(M_SQRT1_2)).erf());
}

template <typename Derived>
auto GeluGradArray(const Eigen::ArrayBase<Derived>& a) {
  using T = typename Derived::Scalar;
  const T inv_sqrt_2pi = T(0.3989422804014327);
  return T(0.5) * (T(1) + (a * T(M_SQRT1_2)).erf()) +
         a * inv_sqrt_2pi * (T(-0.5) * a.square()).exp();
}

}  // namespace

template <typename T>
void SoftmaxInPlace(std::span<T> x) {
  if (x.empty()) return;
  const T m = *std::max_element(x.begin(), x.end());
  T sum = 0;
  for (T& v : x) {
    v = std::exp(v - m);
    sum += v;
  }
  for (T& v : x) v /= sum;
}

template <typename T>
std::vector<T> Softmax(std::span<const T> x) {
  std::vector<T> out(x.begin(), x.end());
  SoftmaxInPlace<T>(out);
  return out;
}

template <typename T>
std::vector<T> LayerNorm(std::span<const T> x, std::span<const T> gamma, std::span<const T> beta,
                         T eps) {
  if (x.size() < 2) Fail(ErrorKind::kShapeMismatch, "layer norm needs dimension >= 2");
  if (gamma.size() != x.size() || (!beta.empty() && beta.size() != x.size())) {
    Fail(ErrorKind::kShapeMismatch, "layer norm scale/shift size mismatch");
  }
  MatrixT<T> in = Eigen::Map<const MatrixT<T>>(x.data(), 1, static_cast<int>(x.size()));
  MatrixT<T> out;
  LayerNormRows<T>(in, gamma.data(), beta.empty() ? nullptr : beta.data(), eps, &out, nullptr);
  return std::vector<T>(out.data(), out.data() + out.size());
}

template <typename T>
void LayerNormRows(const MatrixT<T>& x, const T* gamma, const T* beta, T eps, MatrixT<T>* y,
                   LayerNormCache<T>* cache) {
  const int n = static_cast<int>(x.rows());
  const int h = static_cast<int>(x.cols());
  VectorT<T> mean = x.rowwise().mean();
  MatrixT<T> centered = x.colwise() - mean;
  VectorT<T> var = centered.array().square().rowwise().mean();
  VectorT<T> inv_std = (var.array() + eps).rsqrt();
  MatrixT<T> xhat = centered.array().colwise() * inv_std.array();
  Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>> g(gamma, h);
  y->resize(n, h);
  if (beta != nullptr) {
    Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>> b(beta, h);
    y->noalias() = ((xhat.array().rowwise() * g.array()).rowwise() + b.array()).matrix();
  } else {
    y->noalias() = (xhat.array().rowwise() * g.array()).matrix();
  }
  if (cache != nullptr) {
    cache->xhat = std::move(xhat);
    cache->inv_std = std::move(inv_std);
  }
}

template <typename T>
void LayerNormRowsBackward(const LayerNormCache<T>& cache, const MatrixT<T>& dy, const T* gamma,
                           MatrixT<T>* dx, T* dgamma, T* dbeta) {
  const int h = static_cast<int>(dy.cols());
  Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>> g(gamma, h);
  Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>> dg(dgamma, h);
  dg += (dy.array() * cache.xhat.array()).colwise().sum().matrix();
  if (dbeta != nullptr) {
    Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>> db(dbeta, h);
    db += dy.colwise().sum();
  }
  MatrixT<T> dxhat = (dy.array().rowwise() * g.array()).matrix();
  VectorT<T> mean_dxhat = dxhat.rowwise().mean();
  VectorT<T> mean_dxhat_xhat = (dxhat.array() * cache.xhat.array()).rowwise().mean();
  *dx = ((dxhat.array().colwise() - mean_dxhat.array()) -
         cache.xhat.array().colwise() * mean_dxhat_xhat.array())
            .colwise() *
        cache.inv_std.array();
}

template <typename T>
RopeTable<T>::RopeTable(int max_positions, int head_dim, double base)
    : max_positions_(max_positions), head_dim_(head_dim) {
  if (head_dim % 2 != 0) {
    Fail(ErrorKind::kOddHeadDim, "head dimension " + std::to_string(head_dim) + " is odd");
  }
  const int half = head_dim / 2;
  cos_.resize(static_cast<size_t>(max_positions) * half);
  sin_.resize(cos_.size());
  for (int p = 0; p < max_positions; ++p) {
    for (int j = 0; j < half; ++j) {
      const double theta = std::pow(base, -2.0 * j / head_dim);
      cos_[static_cast<size_t>(p) * half + j] = static_cast<T>(std::cos(p * theta));
      sin_[static_cast<size_t>(p) * half + j] = static_cast<T>(std::sin(p * theta));
    }
  }
}

template <typename T>
MatrixT<T> RopeApply(const MatrixT<T>& x, std::span<const int> positions, double base) {
  if (x.cols() % 2 != 0) {
    Fail(ErrorKind::kOddHeadDim, "head dimension " + std::to_string(x.cols()) + " is odd");
  }
  if (positions.size() != static_cast<size_t>(x.rows())) {
    Fail(ErrorKind::kShapeMismatch, "one position per row required");
  }
  int max_pos = 0;
  for (int p : positions) max_pos = std::max(max_pos, p);
  RopeTable<T> table(max_pos + 1, static_cast<int>(x.cols()), base);
  MatrixT<T> out = x;
  table.Apply(out, positions);
  return out;
}

AttentionMask AttentionMask::Global(int n) {
  AttentionMask m;
  m.n_ = n;
  return m;
}

AttentionMask AttentionMask::SlidingWindow(int n, int window) {
  if (n < 1) Fail(ErrorKind::kInvalidArgument, "mask needs at least one token");
  AttentionMask m;
  m.n_ = n;
  m.half_window_ = window / 2;
  return m;
}

AttentionMask AttentionMask::Dense(int n, std::vector<uint8_t> allowed) {
  if (allowed.size() != static_cast<size_t>(n) * n) {
    Fail(ErrorKind::kShapeMismatch, "dense mask must be n x n");
  }
  for (int i = 0; i < n; ++i) {
    bool any = false;
    for (int j = 0; j < n && !any; ++j) any = allowed[static_cast<size_t>(i) * n + j] != 0;
    if (!any) Fail(ErrorKind::kEmptyRow, "mask row " + std::to_string(i) + " allows nothing");
  }
  AttentionMask m;
  m.n_ = n;
  m.dense_ = std::move(allowed);
  return m;
}

bool AttentionMask::Allowed(int i, int j) const {
  if (!dense_.empty()) return dense_[static_cast<size_t>(i) * n_ + j] != 0;
  if (half_window_ >= 0) return std::abs(i - j) <= half_window_;
  return true;
}

std::pair<int, int> AttentionMask::RowSpan(int i) const {
  if (half_window_ >= 0) {
    return {std::max(0, i - half_window_), std::min(n_, i + half_window_ + 1)};
  }
  return {0, n_};
}

template <typename T>
MatrixT<T> Attention(const MatrixT<T>& q, const MatrixT<T>& k, const MatrixT<T>& v,
                     const AttentionMask& mask, AttentionCache<T>* cache) {
  const int n = static_cast<int>(q.rows());
  const int d = static_cast<int>(q.cols());
  if (k.rows() != n || v.rows() != n || k.cols() != d || mask.n() != n) {
    Fail(ErrorKind::kShapeMismatch, "attention operand shapes disagree");
  }
  const T scale = T(1) / std::sqrt(static_cast<T>(d));
  const bool banded = mask.half_window() >= 0;
  const bool dense = !banded && !mask.global();
  // Row blocks keep each score tile inside L2.
  const int block = banded ? kAttentionRowBlock : kGlobalRowBlock;

  MatrixT<T> out(n, v.cols());
  if (cache != nullptr) cache->blocks.clear();
  for (int r0 = 0; r0 < n; r0 += block) {
    const int r1 = std::min(n, r0 + block);
    const int c0 = mask.RowSpan(r0).first;
    const int c1 = mask.RowSpan(r1 - 1).second;
    MatrixT<T> s(r1 - r0, c1 - c0);
    const MatrixT<T> qs = q.middleRows(r0, r1 - r0) * scale;
    Gemm<T>(qs, false, k.middleRows(c0, c1 - c0), true, s);
    for (int i = r0; i < r1; ++i) {
      auto row = s.row(i - r0);
      if (dense) {
        T m = -std::numeric_limits<T>::infinity();
        for (int j = c0; j < c1; ++j) {
          if (mask.Allowed(i, j)) m = std::max(m, row(j - c0));
        }
        if (!std::isfinite(m)) Fail(ErrorKind::kEmptyRow, "row " + std::to_string(i));
        T sum = 0;
        for (int j = c0; j < c1; ++j) {
          T e = mask.Allowed(i, j) ? std::exp(row(j - c0) - m) : T(0);
          row(j - c0) = e;
          sum += e;
        }
        row /= sum;
      } else {
        // Allowed columns form one contiguous run for band and global masks.
        const auto [a, b] = mask.RowSpan(i);
        auto live = row.segment(a - c0, b - a);
        const T m = live.maxCoeff();
        live = (live.array() - m).exp().matrix();
        live /= live.sum();
        row.head(a - c0).setZero();
        row.tail(c1 - b).setZero();
      }
    }
    Gemm<T>(s, false, v.middleRows(c0, c1 - c0), false, out.middleRows(r0, r1 - r0));
    if (cache != nullptr) cache->blocks.push_back({r0, r1, c0, c1, std::move(s)});
  }
  return out;
}

template <typename T>
void AttentionBackward(const MatrixT<T>& q, const MatrixT<T>& k, const MatrixT<T>& v,
                       const AttentionCache<T>& cache, const MatrixT<T>& dout, MatrixT<T>* dq,
                       MatrixT<T>* dk, MatrixT<T>* dv) {
  const int d = static_cast<int>(q.cols());
  const T scale = T(1) / std::sqrt(static_cast<T>(d));
  dq->setZero(q.rows(), q.cols());
  dk->setZero(k.rows(), k.cols());
  dv->setZero(v.rows(), v.cols());
  for (const auto& b : cache.blocks) {
    const int rb = b.r1 - b.r0;
    const int cb = b.c1 - b.c0;
    const auto d_out = dout.middleRows(b.r0, rb);
    Gemm<T>(b.probs, true, d_out, false, dv->middleRows(b.c0, cb), true);
    MatrixT<T> dp(rb, cb);
    Gemm<T>(d_out, false, v.middleRows(b.c0, cb), true, dp);
    VectorT<T> row_dot = (dp.array() * b.probs.array()).rowwise().sum();
    MatrixT<T> ds = (b.probs.array() * (dp.array().colwise() - row_dot.array())) * scale;
    Gemm<T>(ds, false, k.middleRows(b.c0, cb), false, dq->middleRows(b.r0, rb), true);
    Gemm<T>(ds, true, q.middleRows(b.r0, rb), false, dk->middleRows(b.c0, cb), true);
  }
}

template <typename T>
T Gelu(T x) {
  return T(0.5) * x * (T(1) + std::erf(x * T(M_SQRT1_2)));
}

template <typename T>
T GeluGrad(T x) {
  return T(0.5) * (T(1) + std::erf(x * T(M_SQRT1_2))) +
         x * T(0.3989422804014327) * std::exp(T(-0.5) * x * x);
}

template <typename T>
MatrixT<T> Geglu(const MatrixT<T>& x, const MatrixT<T>& w_in, const MatrixT<T>& w_out,
                 GegluCache<T>* cache) {
  const int inter = static_cast<int>(w_out.rows());
  if (x.cols() != w_in.rows() || w_in.cols() != 2 * inter || w_out.cols() != x.cols()) {
    Fail(ErrorKind::kShapeMismatch, "geglu weight shapes disagree with input");
  }
  MatrixT<T> pre(x.rows(), w_in.cols());
  Gemm<T>(x, false, w_in, false, pre);
  MatrixT<T> gated =
      (GeluArray(pre.leftCols(inter).array()) * pre.rightCols(inter).array()).matrix();
  MatrixT<T> y(x.rows(), w_out.cols());
  Gemm<T>(gated, false, w_out, false, y);
  if (cache != nullptr) {
    cache->pre = std::move(pre);
    cache->gated = std::move(gated);
  }
  return y;
}

template <typename T>
void GegluBackward(const MatrixT<T>& x, const MatrixT<T>& w_in, const MatrixT<T>& w_out,
                   const GegluCache<T>& cache, const MatrixT<T>& dy, MatrixT<T>* dx,
                   MatrixT<T>* dw_in, MatrixT<T>* dw_out) {
  const int inter = static_cast<int>(w_out.rows());
  Gemm<T>(cache.gated, true, dy, false, *dw_out, true);
  MatrixT<T> dgated(dy.rows(), inter);
  Gemm<T>(dy, false, w_out, true, dgated);
  const auto a = cache.pre.leftCols(inter).array();
  const auto b = cache.pre.rightCols(inter).array();
  MatrixT<T> dpre(dy.rows(), 2 * inter);
  dpre.leftCols(inter) = (dgated.array() * b * GeluGradArray(a)).matrix();
  dpre.rightCols(inter) = (dgated.array() * GeluArray(a)).matrix();
  Gemm<T>(x, true, dpre, false, *dw_in, true);
  dx->resize(x.rows(), x.cols());
  Gemm<T>(dpre, false, w_in, true, *dx);
}

#define MICRODOOM_INSTANTIATE_OPS(T)                                                           \
  template std::vector<T> Softmax<T>(std::span<const T>);                                      \
  template void SoftmaxInPlace<T>(std::span<T>);                                               \
  template std::vector<T> LayerNorm<T>(std::span<const T>, std::span<const T>,                 \
                                       std::span<const T>, T);                                 \
  template void LayerNormRows<T>(const MatrixT<T>&, const T*, const T*, T, MatrixT<T>*,        \
                                 LayerNormCache<T>*);                                          \
  template void LayerNormRowsBackward<T>(const LayerNormCache<T>&, const MatrixT<T>&,          \
                                         const T*, MatrixT<T>*, T*, T*);                       \
  template class RopeTable<T>;                                                                 \
  template MatrixT<T> RopeApply<T>(const MatrixT<T>&, std::span<const int>, double);            \
  template MatrixT<T> Attention<T>(const MatrixT<T>&, const MatrixT<T>&, const MatrixT<T>&,    \
                                   const AttentionMask&, AttentionCache<T>*);                  \
  template void AttentionBackward<T>(const MatrixT<T>&, const MatrixT<T>&, const MatrixT<T>&,  \
                                     const AttentionCache<T>&, const MatrixT<T>&, MatrixT<T>*, \
                                     MatrixT<T>*, MatrixT<T>*);                                \
  template T Gelu<T>(T);                                                                       \
  template T GeluGrad<T>(T);                                                                   \
  template MatrixT<T> Geglu<T>(const MatrixT<T>&, const MatrixT<T>&, const MatrixT<T>&,        \
                               GegluCache<T>*);                                                \
  template void GegluBackward<T>(const MatrixT<T>&, const MatrixT<T>&, const MatrixT<T>&,      \
                                 const GegluCache<T>&, const MatrixT<T>&, MatrixT<T>*,         \
                                 MatrixT<T>*, MatrixT<T>*);

MICRODOOM_INSTANTIATE_OPS(float)
MICRODOOM_INSTANTIATE_OPS(double)

#undef MICRODOOM_INSTANTIATE_OPS

}  // namespace microdoom::nn

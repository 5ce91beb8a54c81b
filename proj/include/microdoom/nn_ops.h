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

#ifndef MICRODOOM_NN_OPS_H_
#define MICRODOOM_NN_OPS_H_

// Forward kernels of the encoder and their hand-derived backward passes.
// Every op is instantiated for float (training/inference) and double (the
// finite-difference oracle in tests).

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "microdoom/tensor.h"

namespace microdoom::nn {

// ---------------------------------------------------------------------------
// Softmax

// Max-subtracted normalized exponential.
template <typename T>
std::vector<T> Softmax(std::span<const T> x);
template <typename T>
void SoftmaxInPlace(std::span<T> x);

// ---------------------------------------------------------------------------
// LayerNorm

// Vector form. `beta` may be empty (gamma-only norms inside the transformer).
template <typename T>
std::vector<T> LayerNorm(std::span<const T> x, std::span<const T> gamma,
                         std::span<const T> beta, T eps = T(1e-5));

template <typename T>
struct LayerNormCache {
  MatrixT<T> xhat;
  VectorT<T> inv_std;
};

// Row-wise normalization of x into *y. beta may be null.
template <typename T>
void LayerNormRows(const MatrixT<T>& x, const T* gamma, const T* beta, T eps, MatrixT<T>* y,
                   LayerNormCache<T>* cache);

// Overwrites *dx; accumulates into dgamma and (if non-null) dbeta.
template <typename T>
void LayerNormRowsBackward(const LayerNormCache<T>& cache, const MatrixT<T>& dy, const T* gamma,
                           MatrixT<T>* dx, T* dgamma, T* dbeta);

// ---------------------------------------------------------------------------
// Rotary position embedding

// Rotates consecutive pairs (2j, 2j+1) by pos * base^(-2j/d).
template <typename T>
class RopeTable {
 public:
  RopeTable(int max_positions, int head_dim, double base = 10000.0);

  int head_dim() const { return head_dim_; }
  int max_positions() const { return max_positions_; }

  // x is n x head_dim (a column block of a wider matrix is fine).
  // inverse=true applies the transpose rotation, which is the backward pass.
  template <typename Derived>
  void Apply(Eigen::MatrixBase<Derived>& x, std::span<const int> positions,
             bool inverse = false) const {
    const int half = head_dim_ / 2;
    for (int i = 0; i < x.rows(); ++i) {
      const int pos = positions[i];
      const T* c = &cos_[static_cast<size_t>(pos) * half];
      const T* s = &sin_[static_cast<size_t>(pos) * half];
      for (int j = 0; j < half; ++j) {
        const T a = x(i, 2 * j);
        const T b = x(i, 2 * j + 1);
        const T sn = inverse ? -s[j] : s[j];
        x(i, 2 * j) = a * c[j] - b * sn;
        x(i, 2 * j + 1) = a * sn + b * c[j];
      }
    }
  }

 private:
  int max_positions_;
  int head_dim_;
  std::vector<T> cos_;
  std::vector<T> sin_;
};

// Convenience form of RopeTable::Apply for a standalone matrix.
template <typename T>
MatrixT<T> RopeApply(const MatrixT<T>& x, std::span<const int> positions, double base = 10000.0);

// ---------------------------------------------------------------------------
// Attention

class AttentionMask {
 public:
  static AttentionMask Global(int n);
  // i may attend to j iff |i - j| <= window / 2.
  static AttentionMask SlidingWindow(int n, int window);
  // Row-major n x n booleans. Fails with kEmptyRow if a row forbids everything.
  static AttentionMask Dense(int n, std::vector<uint8_t> allowed);

  int n() const { return n_; }
  bool global() const { return half_window_ < 0 && dense_.empty(); }
  int half_window() const { return half_window_; }
  bool Allowed(int i, int j) const;
  // Half-open column range that contains every allowed j for row i.
  std::pair<int, int> RowSpan(int i) const;

 private:
  int n_ = 0;
  int half_window_ = -1;
  std::vector<uint8_t> dense_;
};

inline AttentionMask SlidingWindowMask(int n, int window = 128) {
  return AttentionMask::SlidingWindow(n, window);
}

// Block of attention probabilities for rows [r0, r1) over columns [c0, c1).
template <typename T>
struct AttentionBlock {
  int r0, r1, c0, c1;
  MatrixT<T> probs;
};

template <typename T>
struct AttentionCache {
  std::vector<AttentionBlock<T>> blocks;
};

// softmax(q k^T / sqrt(d) restricted to mask) v for one head.
template <typename T>
MatrixT<T> Attention(const MatrixT<T>& q, const MatrixT<T>& k, const MatrixT<T>& v,
                     const AttentionMask& mask, AttentionCache<T>* cache = nullptr);

// Overwrites dq, dk, dv.
template <typename T>
void AttentionBackward(const MatrixT<T>& q, const MatrixT<T>& k, const MatrixT<T>& v,
                       const AttentionCache<T>& cache, const MatrixT<T>& dout, MatrixT<T>* dq,
                       MatrixT<T>* dk, MatrixT<T>* dv);

// ---------------------------------------------------------------------------
// Gated MLP

// Exact (erf) GELU.
template <typename T>
T Gelu(T x);
template <typename T>
T GeluGrad(T x);

template <typename T>
struct GegluCache {
  MatrixT<T> pre;    // x * w_in, n x 2I
  MatrixT<T> gated;  // gelu(a) * b, n x I
};

// x: n x H, w_in: H x 2I, w_out: I x H. No bias terms.
template <typename T>
MatrixT<T> Geglu(const MatrixT<T>& x, const MatrixT<T>& w_in, const MatrixT<T>& w_out,
                 GegluCache<T>* cache = nullptr);

// Overwrites dx; accumulates into dw_in, dw_out.
template <typename T>
void GegluBackward(const MatrixT<T>& x, const MatrixT<T>& w_in, const MatrixT<T>& w_out,
                   const GegluCache<T>& cache, const MatrixT<T>& dy, MatrixT<T>* dx,
                   MatrixT<T>* dw_in, MatrixT<T>* dw_out);

}  // namespace microdoom::nn

#endif  // MICRODOOM_NN_OPS_H_

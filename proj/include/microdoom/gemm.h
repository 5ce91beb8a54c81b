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

#ifndef MICRODOOM_GEMM_H_
#define MICRODOOM_GEMM_H_

// Matrix products for the model. Large float products go to the CPU's bf16
// matrix unit when present (bf16 inputs, fp32 accumulation); double and
// small products use Eigen. Setting MICRODOOM_FP32_MATMUL=1 in the
// environment forces Eigen everywhere.

#include "microdoom/tensor.h"

namespace microdoom::nn {

template <typename T>
using ConstMatRef = Eigen::Ref<const MatrixT<T>, 0, Eigen::OuterStride<>>;
template <typename T>
using MatRef = Eigen::Ref<MatrixT<T>, 0, Eigen::OuterStride<>>;

bool Bf16MatmulAvailable();
bool Bf16MatmulEnabled();
// Returns the previous setting. Enabling is a no-op without hardware support.
bool SetBf16Matmul(bool enabled);

// c = op(a) * op(b), or c += ... when accumulate. c must be pre-sized.
template <typename T>
void Gemm(ConstMatRef<T> a, bool trans_a, ConstMatRef<T> b, bool trans_b, MatRef<T> c,
          bool accumulate = false);

// Convenience: returns op(a) * op(b) as a new matrix.
template <typename T>
MatrixT<T> MatMul(ConstMatRef<T> a, bool trans_a, ConstMatRef<T> b, bool trans_b);

}  // namespace microdoom::nn

#endif  // MICRODOOM_GEMM_H_

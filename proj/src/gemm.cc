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

#include "microdoom/gemm.h"

#include <atomic>
#include <cstdlib>
#include <cstring>

#include "microdoom/error.h"

#ifndef MICRODOOM_NO_BF16_KERNEL
#include "bf16_kernel.h"
#endif

namespace microdoom::nn {
namespace {

// Below this many multiply-adds the packing cost outweighs the gain.
constexpr long kBf16MinWork = 1L << 16;

bool DetectBf16() {
#ifdef MICRODOOM_NO_BF16_KERNEL
  return false;
#else
  static const bool ok = internal::Bf16KernelInit();
  return ok;
#endif
}

std::atomic<int>& Bf16State() {
  static std::atomic<int> state = [] {
    const char* env = std::getenv("MICRODOOM_FP32_MATMUL");
    const bool force_fp32 = env != nullptr && std::strcmp(env, "0") != 0 && env[0] != '\0';
    return !force_fp32 && DetectBf16() ? 1 : 0;
  }();
  return state;
}

template <typename T>
void EigenGemm(ConstMatRef<T> a, bool ta, ConstMatRef<T> b, bool tb, MatRef<T> c, bool acc) {
  if (acc) {
    if (ta && tb) c.noalias() += a.transpose() * b.transpose();
    else if (ta) c.noalias() += a.transpose() * b;
    else if (tb) c.noalias() += a * b.transpose();
    else c.noalias() += a * b;
  } else {
    if (ta && tb) c.noalias() = a.transpose() * b.transpose();
    else if (ta) c.noalias() = a.transpose() * b;
    else if (tb) c.noalias() = a * b.transpose();
    else c.noalias() = a * b;
  }
}

}  // namespace

bool Bf16MatmulAvailable() { return DetectBf16(); }

bool Bf16MatmulEnabled() { return Bf16State().load(std::memory_order_relaxed) == 1; }

bool SetBf16Matmul(bool enabled) {
  const bool prev = Bf16MatmulEnabled();
  Bf16State().store(enabled && DetectBf16() ? 1 : 0);
  return prev;
}

template <typename T>
void Gemm(ConstMatRef<T> a, bool trans_a, ConstMatRef<T> b, bool trans_b, MatRef<T> c,
          bool accumulate) {
  const long m = trans_a ? a.cols() : a.rows();
  const long k = trans_a ? a.rows() : a.cols();
  const long kb = trans_b ? b.cols() : b.rows();
  const long n = trans_b ? b.rows() : b.cols();
  if (k != kb || c.rows() != m || c.cols() != n) {
    Fail(ErrorKind::kShapeMismatch, "gemm operand shapes disagree");
  }
  if (m == 0 || n == 0) return;
#ifndef MICRODOOM_NO_BF16_KERNEL
  if constexpr (std::is_same_v<T, float>) {
    if (k > 0 && m * n * k >= kBf16MinWork && Bf16MatmulEnabled()) {
      internal::Bf16Gemm(a.data(), static_cast<int>(a.outerStride()), trans_a, b.data(),
                         static_cast<int>(b.outerStride()), trans_b, c.data(),
                         static_cast<int>(c.outerStride()), static_cast<int>(m),
                         static_cast<int>(n), static_cast<int>(k), accumulate);
      return;
    }
  }
#endif
  EigenGemm<T>(a, trans_a, b, trans_b, c, accumulate);
}

template <typename T>
MatrixT<T> MatMul(ConstMatRef<T> a, bool trans_a, ConstMatRef<T> b, bool trans_b) {
  MatrixT<T> c(trans_a ? a.cols() : a.rows(), trans_b ? b.rows() : b.cols());
  Gemm<T>(a, trans_a, b, trans_b, c, false);
  return c;
}

template void Gemm<float>(ConstMatRef<float>, bool, ConstMatRef<float>, bool, MatRef<float>, bool);
template void Gemm<double>(ConstMatRef<double>, bool, ConstMatRef<double>, bool, MatRef<double>,
                           bool);
template MatrixT<float> MatMul<float>(ConstMatRef<float>, bool, ConstMatRef<float>, bool);
template MatrixT<double> MatMul<double>(ConstMatRef<double>, bool, ConstMatRef<double>, bool);

}  // namespace microdoom::nn

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

#ifndef MICRODOOM_SRC_BF16_KERNEL_H_
#define MICRODOOM_SRC_BF16_KERNEL_H_

// Raw-pointer bf16 matrix-unit GEMM. Built with its own ISA flags, so
// nothing here may be inline template code shared with other files.

namespace microdoom::nn::internal {

// Asks the kernel for tile-data permission once; false if the CPU or OS
// does not offer the bf16 matrix unit.
bool Bf16KernelInit();

// c[m x n] (+)= op(a)[m x k] * op(b)[k x n], row-major with leading
// dimensions lda/ldb/ldc. Inputs are rounded to bf16 (nearest-even,
// denormals to zero); products accumulate in fp32.
void Bf16Gemm(const float* a, int lda, bool trans_a, const float* b, int ldb, bool trans_b,
              float* c, int ldc, int m, int n, int k, bool accumulate);

}  // namespace microdoom::nn::internal

#endif  // MICRODOOM_SRC_BF16_KERNEL_H_

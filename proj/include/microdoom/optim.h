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

#ifndef MICRODOOM_OPTIM_H_
#define MICRODOOM_OPTIM_H_

#include <cstdint>
#include <span>
#include <vector>

#include "microdoom/tensor.h"

namespace microdoom::nn {

struct AdamWConfig {
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float eps = 1e-8f;
  float weight_decay = 0.01f;
};

// Adam with bias correction and decoupled weight decay:
//   p <- p - lr * (m_hat / (sqrt(v_hat) + eps) + wd * p)
class AdamW {
 public:
  explicit AdamW(AdamWConfig config = {}) : config_(config) {}

  // Moments are allocated on the first step; later steps must keep the same
  // parameter list and shapes.
  void Step(std::span<Tensor* const> params, std::span<const Tensor* const> grads, float lr);

  int64_t step_count() const { return step_; }
  const AdamWConfig& config() const { return config_; }
  const std::vector<Tensor>& first_moments() const { return m_; }
  const std::vector<Tensor>& second_moments() const { return v_; }

 private:
  AdamWConfig config_;
  int64_t step_ = 0;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
};

// Linear warmup 0 -> base_lr over `warmup` steps, then half-cosine decay to 0
// at total_steps. Clamped at 0 past the end.
double CosineLr(int64_t step, int64_t warmup, int64_t total_steps, double base_lr = 3e-4);

}  // namespace microdoom::nn

#endif  // MICRODOOM_OPTIM_H_

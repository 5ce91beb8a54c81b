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

#include "microdoom/optim.h"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace microdoom::nn {

void AdamW::Step(std::span<Tensor* const> params, std::span<const Tensor* const> grads,
                 float lr) {
  if (params.size() != grads.size()) {
    Fail(ErrorKind::kShapeMismatch, "parameter and gradient lists differ in length");
  }
  if (m_.empty()) {
    for (const Tensor* p : params) {
      m_.emplace_back(p->shape());
      v_.emplace_back(p->shape());
    }
  }
  if (m_.size() != params.size()) {
    Fail(ErrorKind::kShapeMismatch, "parameter list changed between steps");
  }
  for (size_t i = 0; i < params.size(); ++i) {
    if (!params[i]->SameShape(*grads[i]) || !params[i]->SameShape(m_[i])) {
      Fail(ErrorKind::kShapeMismatch, "tensor " + std::to_string(i) + " " +
                                          params[i]->ShapeString() + " vs gradient " +
                                          grads[i]->ShapeString());
    }
  }
  ++step_;
  const float b1 = config_.beta1;
  const float b2 = config_.beta2;
  const float bias1 = 1.0f - static_cast<float>(std::pow(b1, static_cast<double>(step_)));
  const float bias2 = 1.0f - static_cast<float>(std::pow(b2, static_cast<double>(step_)));
  const float decay = 1.0f - lr * config_.weight_decay;
  for (size_t i = 0; i < params.size(); ++i) {
    auto p = params[i]->mat().array();
    const auto g = grads[i]->mat().array();
    auto m = m_[i].mat().array();
    auto v = v_[i].mat().array();
    m = b1 * m + (1.0f - b1) * g;
    v = b2 * v + (1.0f - b2) * g.square();
    p = p * decay - lr * (m / bias1) / ((v / bias2).sqrt() + config_.eps);
  }
}

double CosineLr(int64_t step, int64_t warmup, int64_t total_steps, double base_lr) {
  if (step < 0) return 0.0;
  if (step < warmup) return base_lr * static_cast<double>(step) / static_cast<double>(warmup);
  if (total_steps <= warmup) return base_lr;
  const double progress =
      static_cast<double>(step - warmup) / static_cast<double>(total_steps - warmup);
  if (progress >= 1.0) return 0.0;
  return std::max(0.0, base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress)));
}

}  // namespace microdoom::nn

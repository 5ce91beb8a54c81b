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

#include "microdoom/policy.h"

#include <cmath>
#include <string>

#include "microdoom/error.h"

namespace microdoom {

bool Compatible(Action a1, Action a2) {
  if (a1 == a2) return false;
  if (a1 == Action::kShoot || a2 == Action::kShoot) return true;
  return a1 == Action::kMoveForward || a2 == Action::kMoveForward;
}

void ValidateProbs(std::span<const float> p) {
  constexpr double kTol = 1e-3;
  if (p.size() != kNumActions) Fail(ErrorKind::kInvalidDistribution, "expected 4 probabilities");
  double sum = 0;
  for (float v : p) {
    if (!std::isfinite(v) || v < -kTol || v > 1 + kTol) {
      Fail(ErrorKind::kInvalidDistribution, "probability out of range: " + std::to_string(v));
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kTol) {
    Fail(ErrorKind::kInvalidDistribution, "probabilities sum to " + std::to_string(sum));
  }
}

ButtonSet SelectButtons(const std::array<float, 4>& p, const PolicyConfig& cfg) {
  ValidateProbs(p);
  int a1 = 0;
  for (int i = 1; i < kNumActions; ++i) {
    if (p[i] > p[a1]) a1 = i;
  }
  ButtonSet out{kAllActions[a1]};
  // Compared in float so a probability equal to a threshold literal (0.15f)
  // stays on the excluded side of the strict test.
  const float ratio = static_cast<float>(cfg.shoot_ratio);
  const float threshold = static_cast<float>(cfg.second_threshold);
  const int shoot = ActionIndex(Action::kShoot);
  if (a1 != shoot && p[shoot] > ratio * p[a1]) out.insert(Action::kShoot);

  int a2 = -1;
  for (int i = 0; i < kNumActions; ++i) {
    if (i == shoot || i == a1) continue;
    if (a2 < 0 || p[i] > p[a2]) a2 = i;
  }
  if (p[a2] > threshold && Compatible(kAllActions[a1], kAllActions[a2])) {
    out.insert(kAllActions[a2]);
  }
  return out;
}

double CompositeRate(std::span<const ButtonSet> history) {
  if (history.empty()) Fail(ErrorKind::kEmptyHistory, "no decisions recorded");
  int composite = 0;
  for (const ButtonSet& b : history) composite += b.size() >= 2;
  return static_cast<double>(composite) / history.size();
}

}  // namespace microdoom

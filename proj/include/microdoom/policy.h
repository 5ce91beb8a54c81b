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

#ifndef MICRODOOM_POLICY_H_
#define MICRODOOM_POLICY_H_

#include <array>
#include <span>

#include "microdoom/actions.h"

namespace microdoom {

struct PolicyConfig {
  double shoot_ratio = 0.75;
  double second_threshold = 0.15;
};

// Movement plus rotation. Rotations contradict each other; shoot composes
// with anything.
bool Compatible(Action a1, Action a2);

// Throws kInvalidDistribution when p is not a distribution (tolerance 1e-3).
void ValidateProbs(std::span<const float> p);

// Argmax action, plus shoot on the ratio test and a compatible runner-up.
// Both comparisons are strict.
ButtonSet SelectButtons(const std::array<float, 4>& p, const PolicyConfig& cfg = {});

// Fraction of sets holding two or more buttons. Throws kEmptyHistory.
double CompositeRate(std::span<const ButtonSet> history);

}  // namespace microdoom

#endif  // MICRODOOM_POLICY_H_

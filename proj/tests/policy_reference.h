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

#ifndef MICRODOOM_TESTS_POLICY_REFERENCE_H_
#define MICRODOOM_TESTS_POLICY_REFERENCE_H_

// Independent composite-action reference: rank the actions, then walk the
// ranking. Kept deliberately different in shape from SelectButtons.

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <vector>

#include "microdoom/actions.h"

namespace microdoom::testing {

inline bool ReferenceCompatible(int a, int b) {
  // 0 shoot, 1 forward, 2 left, 3 right.
  static constexpr bool kTable[4][4] = {
      {false, true, true, true},
      {true, false, true, true},
      {true, true, false, false},
      {true, true, false, false},
  };
  return kTable[a][b];
}

inline uint8_t ReferenceSelect(const std::array<float, 4>& p, float ratio = 0.75f, float threshold = 0.15f) {
  std::array<int, 4> order = {0, 1, 2, 3};
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return p[x] > p[y]; });
  const int a1 = order[0];
  uint8_t bits = static_cast<uint8_t>(1u << a1);
  if (a1 != 0 && p[0] > ratio * p[a1]) bits |= 1u;
  int a2 = -1;
  for (int idx : order) {
    if (idx != 0 && idx != a1) {
      a2 = idx;
      break;
    }
  }
  if (p[a2] > threshold && ReferenceCompatible(a1, a2)) bits |= static_cast<uint8_t>(1u << a2);
  return bits;
}

// Lattice points k/38 on the 4-simplex (10,660 of them) plus hand-placed
// vectors that sit exactly on the ratio and threshold boundaries, or one
// float ulp either side.
inline std::vector<std::array<float, 4>> PolicyGrid() {
  std::vector<std::array<float, 4>> out;
  constexpr int kN = 38;
  for (int a = 0; a <= kN; ++a)
    for (int b = 0; a + b <= kN; ++b)
      for (int c = 0; a + b + c <= kN; ++c) {
        const int d = kN - a - b - c;
        out.push_back({static_cast<float>(a) / kN, static_cast<float>(b) / kN, static_cast<float>(c) / kN,
                       static_cast<float>(d) / kN});
      }
  auto push_perms = [&](float s, float top, float x, float y) {
    out.push_back({s, top, x, y});
    out.push_back({s, x, top, y});
    out.push_back({s, y, x, top});
  };
  // p_shoot == 0.75 * p_top exactly (0.375 = 0.75 * 0.5), and one ulp over.
  push_perms(0.375f, 0.5f, 0.0625f, 0.0625f);
  push_perms(std::nextafter(0.375f, 1.0f), 0.5f, 0.0625f, 0.0625f - 6e-8f);
  push_perms(std::nextafter(0.375f, 0.0f), 0.5f, 0.0625f, 0.0625f);
  // Second action at exactly 0.15f and one ulp above/below.
  for (float second : {0.15f, std::nextafter(0.15f, 1.0f), std::nextafter(0.15f, 0.0f)}) {
    push_perms(0.05f, 0.95f - second, second, 0.0f);
    push_perms(0.8f - second, 0.2f, second, 0.0f);
  }
  // Exact ties for the argmax.
  push_perms(0.25f, 0.25f, 0.25f, 0.25f);
  push_perms(0.1f, 0.45f, 0.45f, 0.0f);
  out.push_back({0.45f, 0.45f, 0.1f, 0.0f});
  out.push_back({0.4f, 0.45f, 0.1f, 0.05f});
  out.push_back({0.97f, 0.01f, 0.01f, 0.01f});
  out.push_back({0.05f, 0.5f, 0.4f, 0.05f});
  return out;
}

}  // namespace microdoom::testing

#endif  // MICRODOOM_TESTS_POLICY_REFERENCE_H_

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

#include <gtest/gtest.h>

#include "microdoom/error.h"
#include "policy_reference.h"

namespace microdoom {
namespace {

using A = Action;

TEST(SelectButtonsTest, HandExamples) {
  EXPECT_EQ(SelectButtons({0.40f, 0.45f, 0.10f, 0.05f}), (ButtonSet{A::kMoveForward, A::kShoot}));
  EXPECT_EQ(SelectButtons({0.97f, 0.01f, 0.01f, 0.01f}), (ButtonSet{A::kShoot}));
  EXPECT_EQ(SelectButtons({0.05f, 0.50f, 0.40f, 0.05f}), (ButtonSet{A::kMoveForward, A::kTurnLeft}));
  // Shoot on top may pair with a movement or rotation.
  EXPECT_EQ(SelectButtons({0.6f, 0.05f, 0.3f, 0.05f}), (ButtonSet{A::kShoot, A::kTurnLeft}));
  // Two rotations never combine.
  EXPECT_EQ(SelectButtons({0.05f, 0.05f, 0.5f, 0.4f}), (ButtonSet{A::kTurnLeft}));
}

TEST(SelectButtonsTest, StrictBoundaries) {
  // 0.375 == 0.75 * 0.5 exactly: not strictly greater.
  EXPECT_FALSE(SelectButtons({0.375f, 0.5f, 0.0625f, 0.0625f}).contains(A::kShoot));
  EXPECT_TRUE(SelectButtons({0.376f, 0.5f, 0.0620f, 0.0620f}).contains(A::kShoot));
  EXPECT_FALSE(SelectButtons({0.05f, 0.80f, 0.15f, 0.0f}).contains(A::kTurnLeft));
  EXPECT_TRUE(SelectButtons({0.05f, 0.7999f, 0.1501f, 0.0f}).contains(A::kTurnLeft));
}

TEST(SelectButtonsTest, TiesGoToLowestIndex) {
  EXPECT_EQ(SelectButtons({0.25f, 0.25f, 0.25f, 0.25f}), (ButtonSet{A::kShoot, A::kMoveForward}));
  EXPECT_TRUE(SelectButtons({0.1f, 0.45f, 0.45f, 0.0f}).contains(A::kMoveForward));
}

TEST(SelectButtonsTest, Thresholds) {
  PolicyConfig eager{0.0, 0.15};
  EXPECT_TRUE(SelectButtons({0.01f, 0.2f, 0.7f, 0.09f}, eager).contains(A::kShoot));
  PolicyConfig never{1.0, 1.0};
  EXPECT_EQ(SelectButtons({0.4f, 0.45f, 0.1f, 0.05f}, never), (ButtonSet{A::kMoveForward}));
}

TEST(SelectButtonsTest, InvalidDistribution) {
  try {
    SelectButtons({0.5f, 0.5f, 0.5f, 0.0f});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidDistribution);
  }
  EXPECT_THROW(SelectButtons({-0.1f, 0.6f, 0.5f, 0.0f}), Error);
  EXPECT_NO_THROW(SelectButtons({0.2505f, 0.25f, 0.25f, 0.25f}));
}

TEST(SelectButtonsTest, AgreesWithReferenceOnGrid) {
  int mismatches = 0;
  const auto grid = testing::PolicyGrid();
  ASSERT_GE(grid.size(), 10000u);
  for (const auto& p : grid) {
    const ButtonSet got = SelectButtons(p);
    if (got.bits() != testing::ReferenceSelect(p)) ++mismatches;
    // Invariants on every output.
    EXPECT_FALSE(got.empty());
    EXPECT_FALSE(got.contradictory());
    EXPECT_LE(got.size(), 3);
  }
  EXPECT_EQ(mismatches, 0);
}

TEST(SelectButtonsTest, ScaleInvariantUpToRenormalization) {
  for (const auto& p : testing::PolicyGrid()) {
    std::array<float, 4> q;
    double s = 0;
    for (int i = 0; i < 4; ++i) s += (q[i] = p[i] * 3.0f);
    for (auto& v : q) v = static_cast<float>(v / s);
    // Boundary-exact vectors may move by an ulp; only compare clear cases.
    if (std::abs(p[0] - 0.75f * *std::max_element(p.begin(), p.end())) < 1e-5f) continue;
    bool near_threshold = false;
    for (float v : p) near_threshold |= std::abs(v - 0.15f) < 1e-5f;
    bool tie = false;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) tie |= std::abs(p[i] - p[j]) < 1e-5f;
    if (near_threshold || tie) continue;
    EXPECT_EQ(SelectButtons(p), SelectButtons(q));
  }
}

TEST(CompatibleTest, Table) {
  EXPECT_TRUE(Compatible(A::kMoveForward, A::kTurnLeft));
  EXPECT_TRUE(Compatible(A::kMoveForward, A::kTurnRight));
  EXPECT_FALSE(Compatible(A::kTurnLeft, A::kTurnRight));
  EXPECT_FALSE(Compatible(A::kTurnLeft, A::kTurnLeft));
}

TEST(CompositeRateTest, Counts) {
  std::vector<ButtonSet> singles = {{A::kShoot}, {A::kTurnLeft}};
  EXPECT_EQ(CompositeRate(singles), 0.0);
  std::vector<ButtonSet> pairs = {{A::kShoot, A::kTurnLeft}};
  EXPECT_EQ(CompositeRate(pairs), 1.0);
  std::vector<ButtonSet> mixed = {
      {A::kMoveForward}, {A::kMoveForward, A::kShoot}, {A::kTurnLeft}, {A::kMoveForward, A::kTurnLeft}};
  EXPECT_EQ(CompositeRate(mixed), 0.5);
  try {
    CompositeRate({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kEmptyHistory);
  }
}

TEST(ButtonSetTest, Strings) {
  EXPECT_EQ((ButtonSet{A::kShoot, A::kMoveForward}).ToString(), "move_forward+shoot");
  EXPECT_EQ(ButtonSet::Parse("shoot+turn_left"), (ButtonSet{A::kTurnLeft, A::kShoot}));
  EXPECT_EQ(ButtonSet().ToString(), "none");
  EXPECT_FALSE(ButtonSet::Parse("jump").has_value());
}

}  // namespace
}  // namespace microdoom

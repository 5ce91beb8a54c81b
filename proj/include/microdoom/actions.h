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

#ifndef MICRODOOM_ACTIONS_H_
#define MICRODOOM_ACTIONS_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace microdoom {

// Classifier output order. Stored in checkpoint headers; do not reorder.
enum class Action : int { kShoot = 0, kMoveForward = 1, kTurnLeft = 2, kTurnRight = 3 };

inline constexpr int kNumActions = 4;
inline constexpr std::array<Action, kNumActions> kAllActions = {
    Action::kShoot, Action::kMoveForward, Action::kTurnLeft, Action::kTurnRight};

std::string_view ActionName(Action action);
std::optional<Action> ActionFromName(std::string_view name);

inline int ActionIndex(Action a) { return static_cast<int>(a); }

// A set of held buttons. The policy never produces an empty set or one with
// both rotations, but the arena accepts any set (an empty set is a no-op tic).
class ButtonSet {
 public:
  constexpr ButtonSet() = default;
  constexpr ButtonSet(std::initializer_list<Action> actions) {
    for (Action a : actions) bits_ |= Bit(a);
  }

  static constexpr ButtonSet FromBits(uint8_t bits) {
    ButtonSet s;
    s.bits_ = bits & 0xF;
    return s;
  }

  constexpr bool contains(Action a) const { return (bits_ & Bit(a)) != 0; }
  constexpr void insert(Action a) { bits_ |= Bit(a); }
  constexpr void erase(Action a) { bits_ &= ~Bit(a); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr int size() const {
    return ((bits_ >> 0) & 1) + ((bits_ >> 1) & 1) + ((bits_ >> 2) & 1) + ((bits_ >> 3) & 1);
  }
  constexpr uint8_t bits() const { return bits_; }
  constexpr bool operator==(const ButtonSet&) const = default;

  // Both turn buttons held at once.
  constexpr bool contradictory() const {
    return contains(Action::kTurnLeft) && contains(Action::kTurnRight);
  }

  // '+'-joined lowercase names, movement first and shoot last:
  // "move_forward+turn_left+shoot". Empty set serializes as "none".
  std::string ToString() const;

  // Inverse of ToString; also accepts names in any order. Returns nullopt on
  // unknown names.
  static std::optional<ButtonSet> Parse(std::string_view text);

 private:
  static constexpr uint8_t Bit(Action a) { return uint8_t{1} << static_cast<int>(a); }
  uint8_t bits_ = 0;
};

}  // namespace microdoom

#endif  // MICRODOOM_ACTIONS_H_

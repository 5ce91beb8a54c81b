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

#include "microdoom/actions.h"

#include <vector>

namespace microdoom {
namespace {

// Serialization order: movement, rotation, then shoot.
constexpr std::array<Action, kNumActions> kDisplayOrder = {
    Action::kMoveForward, Action::kTurnLeft, Action::kTurnRight, Action::kShoot};

}  // namespace

std::string_view ActionName(Action action) {
  switch (action) {
    case Action::kShoot: return "shoot";
    case Action::kMoveForward: return "move_forward";
    case Action::kTurnLeft: return "turn_left";
    case Action::kTurnRight: return "turn_right";
  }
  return "?";
}

std::optional<Action> ActionFromName(std::string_view name) {
  for (Action a : kAllActions) {
    if (ActionName(a) == name) return a;
  }
  return std::nullopt;
}

std::string ButtonSet::ToString() const {
  if (empty()) return "none";
  std::string out;
  for (Action a : kDisplayOrder) {
    if (!contains(a)) continue;
    if (!out.empty()) out += '+';
    out += ActionName(a);
  }
  return out;
}

std::optional<ButtonSet> ButtonSet::Parse(std::string_view text) {
  if (text == "none") return ButtonSet{};
  ButtonSet set;
  size_t start = 0;
  while (start <= text.size()) {
    size_t end = text.find('+', start);
    if (end == std::string_view::npos) end = text.size();
    auto action = ActionFromName(text.substr(start, end - start));
    if (!action) return std::nullopt;
    set.insert(*action);
    start = end + 1;
  }
  return set;
}

}  // namespace microdoom

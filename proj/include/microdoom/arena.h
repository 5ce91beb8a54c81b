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

#ifndef MICRODOOM_ARENA_H_
#define MICRODOOM_ARENA_H_

// Circular arena: the player stands near the center, enemies spawn on the
// rim and walk inward. Angles are radians, counter-clockwise positive, so
// turn_left increases facing.

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "microdoom/actions.h"
#include "microdoom/frame_codec.h"

namespace microdoom {

struct EpisodeConfig {
  int max_tics = 2100;
  int frame_skip = 4;
  double arena_radius = 10.0;
  double spawn_radius = 9.5;
  double angular_step = 3.0 * 3.14159265358979323846 / 180.0;  // per tic
  double move_speed = 0.1;                                      // m/tic
  double enemy_speed = 0.015;                                   // m/tic
  int spawn_interval = 70;                                      // tics
  int initial_enemies = 3;
  int max_enemies = 12;
  int weapon_cooldown = 8;  // tics
  double hit_half_angle = 5.0 * 3.14159265358979323846 / 180.0;
  double hit_range = 12.0;
  double enemy_radius = 0.4;
  double contact_radius = 1.0;
  int player_health = 100;
  int contact_damage = 4;  // per tic per touching enemy

  int MaxDecisions() const { return max_tics / frame_skip; }
  void Validate() const;
  nlohmann::json ToJson() const;
};

struct Vec2 {
  double x = 0;
  double y = 0;
};

struct Enemy {
  int id = 0;
  Vec2 pos;
  int health = 1;
  double speed = 0;
};

struct KillEvent {
  int tic = 0;
  int enemy_id = 0;
};

struct ArenaState {
  EpisodeConfig config;
  Vec2 player;
  double facing = 0;
  int health = 0;
  std::vector<Enemy> enemies;
  int tic = 0;
  int cooldown = 0;
  int next_enemy_id = 0;
  bool done = false;
  std::mt19937_64 rng;
  std::vector<KillEvent> kills;  // every kill since reset
};

struct StepResult {
  AsciiFrame ascii;
  DepthGrid depth;
  int reward = 0;
  bool done = false;
  int tic = 0;
  int kills = 0;  // this step
  bool died = false;
};

// Wraps to (-pi, pi].
double WrapAngle(double a);
double NormalizeFacing(double a);  // [0, 2pi)

class Arena {
 public:
  explicit Arena(EpisodeConfig config = {});

  StepResult Reset(uint64_t seed);
  // Throws kEpisodeFinished once done.
  StepResult Step(ButtonSet buttons);

  const ArenaState& state() const { return state_; }
  // For tests and scripted scenes.
  ArenaState& mutable_state() { return state_; }
  // Adds an enemy at the given polar offset from the player.
  void PlaceEnemy(double bearing, double distance);

 private:
  void Tic(ButtonSet buttons, int* kills);
  void Spawn();
  double Uniform();

  ArenaState state_;
};

std::pair<AsciiFrame, DepthGrid> Render(const ArenaState& state);

struct ExpertDecision {
  ButtonSet buttons;
  std::array<float, 4> scores{};
};

// Turns toward the nearest enemy by the shorter direction, fires when the
// shot would land, scans left when the arena is empty.
ExpertDecision ScriptedExpert(const ArenaState& state);

// Seed plus the button sequence re-simulates an episode exactly.
struct Replay {
  uint64_t seed = 0;
  EpisodeConfig config;
  std::vector<ButtonSet> actions;

  nlohmann::json ToJson() const;
  static Replay FromJson(const nlohmann::json& j);
};

std::vector<StepResult> RunReplay(const Replay& replay);

}  // namespace microdoom

#endif  // MICRODOOM_ARENA_H_

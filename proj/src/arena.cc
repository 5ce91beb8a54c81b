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

#include "microdoom/arena.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "microdoom/demo_dataset.h"
#include "microdoom/error.h"

namespace microdoom {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kFov = kPi / 2;
constexpr int kViewRows = 23;
constexpr double kHorizon = 11.0;  // row index of the horizon line
constexpr double kWallScale = 30.0;
constexpr double kEnemyScale = 25.0;
constexpr double kDepthRange = 20.0;
constexpr char kHudTop = '-';
constexpr char kHudBottom = '=';

uint8_t ClampLuma(double v, double lo, double hi) {
  return static_cast<uint8_t>(std::lround(std::clamp(v, lo, hi)));
}

uint8_t DepthValue(double d) {
  return static_cast<uint8_t>(std::lround(255.0 * std::min(std::max(d, 0.0) / kDepthRange, 1.0)));
}

double Length(Vec2 v) { return std::hypot(v.x, v.y); }

}  // namespace

double WrapAngle(double a) {
  a = std::fmod(a, 2 * kPi);
  if (a <= -kPi) a += 2 * kPi;
  if (a > kPi) a -= 2 * kPi;
  return a;
}

double NormalizeFacing(double a) {
  a = std::fmod(a, 2 * kPi);
  if (a < 0) a += 2 * kPi;
  if (a >= 2 * kPi) a = 0;
  return a;
}

void EpisodeConfig::Validate() const {
  if (max_tics < 1 || frame_skip < 1 || arena_radius <= 0 || spawn_radius <= 0 ||
      spawn_radius > arena_radius || spawn_interval < 1 || weapon_cooldown < 0 ||
      player_health < 1 || max_enemies < 0) {
    Fail(ErrorKind::kInvalidArgument, "bad episode config");
  }
}

nlohmann::json EpisodeConfig::ToJson() const {
  return {{"max_tics", max_tics},
          {"frame_skip", frame_skip},
          {"arena_radius", arena_radius},
          {"spawn_radius", spawn_radius},
          {"angular_step", angular_step},
          {"move_speed", move_speed},
          {"enemy_speed", enemy_speed},
          {"spawn_interval", spawn_interval},
          {"initial_enemies", initial_enemies},
          {"max_enemies", max_enemies},
          {"weapon_cooldown", weapon_cooldown},
          {"hit_half_angle", hit_half_angle},
          {"hit_range", hit_range},
          {"enemy_radius", enemy_radius},
          {"contact_radius", contact_radius},
          {"player_health", player_health},
          {"contact_damage", contact_damage}};
}

Arena::Arena(EpisodeConfig config) {
  config.Validate();
  state_.config = config;
  state_.done = true;
}

double Arena::Uniform() {
  // 53 random bits; unlike std::uniform_real_distribution this is the same
  // on every standard library.
  return static_cast<double>(state_.rng() >> 11) * 0x1.0p-53;
}

void Arena::Spawn() {
  const auto& c = state_.config;
  if (static_cast<int>(state_.enemies.size()) >= c.max_enemies) return;
  const double angle = 2 * kPi * Uniform();
  Enemy e;
  e.id = state_.next_enemy_id++;
  e.pos = {c.spawn_radius * std::cos(angle), c.spawn_radius * std::sin(angle)};
  e.speed = c.enemy_speed;
  state_.enemies.push_back(e);
}

StepResult Arena::Reset(uint64_t seed) {
  const EpisodeConfig config = state_.config;
  state_ = ArenaState{};
  state_.config = config;
  state_.rng.seed(seed);
  state_.health = config.player_health;
  for (int i = 0; i < config.initial_enemies; ++i) Spawn();
  StepResult r;
  std::tie(r.ascii, r.depth) = Render(state_);
  return r;
}

void Arena::PlaceEnemy(double bearing, double distance) {
  Enemy e;
  e.id = state_.next_enemy_id++;
  const double a = state_.facing + bearing;
  e.pos = {state_.player.x + distance * std::cos(a), state_.player.y + distance * std::sin(a)};
  e.speed = state_.config.enemy_speed;
  state_.enemies.push_back(e);
}

void Arena::Tic(ButtonSet buttons, int* kills) {
  auto& s = state_;
  const auto& c = s.config;
  if (buttons.contains(Action::kTurnLeft)) s.facing += c.angular_step;
  if (buttons.contains(Action::kTurnRight)) s.facing -= c.angular_step;
  s.facing = NormalizeFacing(s.facing);

  if (buttons.contains(Action::kMoveForward)) {
    Vec2 p{s.player.x + c.move_speed * std::cos(s.facing),
           s.player.y + c.move_speed * std::sin(s.facing)};
    const double limit = c.arena_radius - 0.5;
    const double r = Length(p);
    if (r > limit) p = {p.x * limit / r, p.y * limit / r};
    s.player = p;
  }

  if (buttons.contains(Action::kShoot) && s.cooldown == 0) {
    s.cooldown = c.weapon_cooldown;
    int target = -1;
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < s.enemies.size(); ++i) {
      const Vec2 rel{s.enemies[i].pos.x - s.player.x, s.enemies[i].pos.y - s.player.y};
      const double d = Length(rel);
      const double err = WrapAngle(std::atan2(rel.y, rel.x) - s.facing);
      if (std::abs(err) <= c.hit_half_angle && d <= c.hit_range && d < best) {
        best = d;
        target = static_cast<int>(i);
      }
    }
    if (target >= 0 && --s.enemies[target].health <= 0) {
      s.kills.push_back({s.tic, s.enemies[target].id});
      s.enemies.erase(s.enemies.begin() + target);
      ++*kills;
    }
  } else if (s.cooldown > 0) {
    --s.cooldown;
  }

  for (Enemy& e : s.enemies) {
    const Vec2 rel{s.player.x - e.pos.x, s.player.y - e.pos.y};
    const double d = Length(rel);
    if (d > c.contact_radius) {
      const double step = std::min(e.speed, d - c.contact_radius);
      e.pos.x += rel.x / d * step;
      e.pos.y += rel.y / d * step;
    }
    if (Length({s.player.x - e.pos.x, s.player.y - e.pos.y}) <= c.contact_radius + 1e-9) {
      s.health -= c.contact_damage;
    }
  }

  ++s.tic;
  if (s.tic % c.spawn_interval == 0) Spawn();
}

StepResult Arena::Step(ButtonSet buttons) {
  if (state_.done) Fail(ErrorKind::kEpisodeFinished, "step after the episode ended");
  StepResult r;
  const int skip = state_.config.frame_skip;
  for (int i = 0; i < skip && state_.health > 0 && state_.tic < state_.config.max_tics; ++i) {
    Tic(buttons, &r.kills);
  }
  r.died = state_.health <= 0;
  state_.done = r.died || state_.tic >= state_.config.max_tics;
  // Kills in the fatal step still count as frags.
  r.reward = r.kills > 0 ? r.kills : (r.died ? -1 : 0);
  r.done = state_.done;
  r.tic = state_.tic;
  std::tie(r.ascii, r.depth) = Render(state_);
  return r;
}

std::pair<AsciiFrame, DepthGrid> Render(const ArenaState& s) {
  const auto& c = s.config;
  GrayImage luma(kFrameCols, kFrameRows, 0);
  DepthBuffer depth(kFrameCols, kFrameRows, 0);
  const double col_width = kFov / kFrameCols;
  const double pp = s.player.x * s.player.x + s.player.y * s.player.y;

  for (int col = 0; col < kFrameCols; ++col) {
    const double rel_angle = kFov / 2 - (col + 0.5) * col_width;
    const double theta = s.facing + rel_angle;
    const double ux = std::cos(theta), uy = std::sin(theta);
    const double b = s.player.x * ux + s.player.y * uy;
    const double t = -b + std::sqrt(std::max(0.0, b * b - (pp - c.arena_radius * c.arena_radius)));
    const double wall = std::max(t * std::cos(rel_angle), 1e-3);
    const double wall_half = kWallScale / wall;

    double enemy = std::numeric_limits<double>::infinity();
    for (const Enemy& e : s.enemies) {
      const Vec2 rel{e.pos.x - s.player.x, e.pos.y - s.player.y};
      const double d = std::max(Length(rel), 1e-3);
      const double bearing = std::atan2(rel.y, rel.x);
      if (std::abs(WrapAngle(bearing - theta)) > std::atan(c.enemy_radius / d)) continue;
      const double perp = d * std::cos(WrapAngle(bearing - s.facing));
      if (perp > 0 && perp < enemy) enemy = perp;
    }
    const double enemy_half = kEnemyScale / enemy;

    for (int row = 0; row < kViewRows; ++row) {
      const double off = std::abs(row - kHorizon);
      double d;
      uint8_t v;
      if (enemy < wall && off < enemy_half) {
        d = enemy;
        v = ClampLuma(255 - 8 * d, 120, 255);
      } else if (off < wall_half) {
        d = wall;
        v = ClampLuma(240 - 14 * d, 30, 240);
      } else if (row > kHorizon) {
        d = kWallScale / off;
        v = ClampLuma(110 - 5 * d, 8, 110);
      } else {
        d = kWallScale / off;
        v = ClampLuma(60 - 3 * d, 5, 60);
      }
      luma.at(col, row) = v;
      depth.at(col, row) = DepthValue(d);
    }
  }

  AsciiFrame frame = AsciiFromLuma(luma);
  for (int col = 0; col < kFrameCols; ++col) {
    frame.set(kViewRows, col, kHudTop);
    frame.set(kViewRows + 1, col, kHudBottom);
  }
  return {frame, QuantizeDepth(depth)};
}

ExpertDecision ScriptedExpert(const ArenaState& s) {
  const auto& c = s.config;
  ExpertDecision out;
  const Enemy* target = nullptr;
  double best = std::numeric_limits<double>::infinity();
  for (const Enemy& e : s.enemies) {
    const double d = Length({e.pos.x - s.player.x, e.pos.y - s.player.y});
    if (d < best) {
      best = d;
      target = &e;
    }
  }
  if (target == nullptr) {
    out.buttons = {Action::kTurnLeft};
  } else {
    const double err = WrapAngle(
        std::atan2(target->pos.y - s.player.y, target->pos.x - s.player.x) - s.facing);
    const bool in_range = best <= c.hit_range;
    if (std::abs(err) < c.hit_half_angle) {
      out.buttons = {Action::kShoot};
    } else {
      out.buttons = {err > 0 ? Action::kTurnLeft : Action::kTurnRight};
      // The turn brings the target into the cone within this decision.
      if (in_range && std::abs(err) < c.hit_half_angle + c.frame_skip * c.angular_step) {
        out.buttons.insert(Action::kShoot);
      }
    }
    if (!in_range) out.buttons.erase(Action::kShoot);
    if (out.buttons.empty()) out.buttons = {err > 0 ? Action::kTurnLeft : Action::kTurnRight};
  }
  out.scores = SoftScores(out.buttons);
  return out;
}

nlohmann::json Replay::ToJson() const {
  nlohmann::json acts = nlohmann::json::array();
  for (const ButtonSet& b : actions) acts.push_back(b.ToString());
  return {{"seed", seed}, {"config", config.ToJson()}, {"actions", acts}};
}

Replay Replay::FromJson(const nlohmann::json& j) {
  Replay r;
  try {
    r.seed = j.at("seed").get<uint64_t>();
    const auto& c = j.at("config");
    EpisodeConfig& e = r.config;
    e.max_tics = c.at("max_tics");
    e.frame_skip = c.at("frame_skip");
    e.arena_radius = c.at("arena_radius");
    e.spawn_radius = c.at("spawn_radius");
    e.angular_step = c.at("angular_step");
    e.move_speed = c.at("move_speed");
    e.enemy_speed = c.at("enemy_speed");
    e.spawn_interval = c.at("spawn_interval");
    e.initial_enemies = c.at("initial_enemies");
    e.max_enemies = c.at("max_enemies");
    e.weapon_cooldown = c.at("weapon_cooldown");
    e.hit_half_angle = c.at("hit_half_angle");
    e.hit_range = c.at("hit_range");
    e.enemy_radius = c.at("enemy_radius");
    e.contact_radius = c.at("contact_radius");
    e.player_health = c.at("player_health");
    e.contact_damage = c.at("contact_damage");
    for (const auto& a : j.at("actions")) {
      const std::string name = a.get<std::string>();
      auto b = name == "none" ? std::optional<ButtonSet>(ButtonSet{}) : ButtonSet::Parse(name);
      if (!b) Fail(ErrorKind::kSchema, "bad action in replay: " + name);
      r.actions.push_back(*b);
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kSchema, std::string("bad replay: ") + e.what());
  }
  return r;
}

std::vector<StepResult> RunReplay(const Replay& replay) {
  Arena arena(replay.config);
  std::vector<StepResult> out;
  out.push_back(arena.Reset(replay.seed));
  for (const ButtonSet& b : replay.actions) out.push_back(arena.Step(b));
  return out;
}

}  // namespace microdoom

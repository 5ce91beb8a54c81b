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

#ifndef MICRODOOM_PLAY_SESSION_H_
#define MICRODOOM_PLAY_SESSION_H_

// Server side of the live play console: owns the arena, the current control
// settings and demo recording. Transport-free; play_server.h carries the
// JSON messages over WebSocket.
//
// Client -> server kinds: hello, input, control.
// Server -> client kinds: hello, frame, stats, error.

#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "microdoom/arena.h"
#include "microdoom/doom_encoder.h"
#include "microdoom/policy.h"

namespace microdoom {

inline constexpr int kProtocolVersion = 1;

enum class ControlMode { kHuman, kAgent };

struct SessionOptions {
  int frame_skip = 4;
  uint64_t seed = 0;
  std::string record_dir = ".";
  PolicyConfig policy;
  EpisodeConfig arena;
};

class PlaySession {
 public:
  // model may be null, in which case agent mode plays the scripted expert
  // through the same policy as a model would.
  PlaySession(std::string id, SessionOptions options, std::shared_ptr<const DoomEncoder> model);

  const std::string& id() const { return id_; }

  // Replies to one client message (hello, input or control). Malformed
  // messages produce an error reply, never an exception.
  std::vector<nlohmann::json> Handle(const nlohmann::json& msg);

  // Takes one decision and returns the resulting frame message. Episodes
  // restart automatically with the next seed.
  nlohmann::json Tick();

  nlohmann::json HelloMessage(bool resumed) const;
  nlohmann::json StatsMessage() const;
  // The frame the client should show now; used on reconnect.
  nlohmann::json CurrentFrame() const;

  ControlMode mode() const { return mode_; }
  const PolicyConfig& policy() const { return options_.policy; }
  bool recording() const { return record_.is_open(); }
  const std::string& record_path() const { return record_path_; }
  int64_t recorded_frames() const { return recorded_; }
  double composite_rate() const;

 private:
  nlohmann::json HandleControl(const nlohmann::json& msg);
  nlohmann::json HandleInput(const nlohmann::json& msg);
  void StartEpisode(uint64_t seed);
  void StartRecording();
  void StopRecording();
  nlohmann::json FrameMessage(const StepResult& r, const ButtonSet& chosen,
                              const std::optional<std::array<float, 4>>& probs) const;

  std::string id_;
  SessionOptions options_;
  std::shared_ptr<const DoomEncoder> model_;
  ControlMode mode_ = ControlMode::kHuman;
  Arena arena_;
  StepResult last_;
  nlohmann::json last_frame_;
  uint64_t episode_seed_ = 0;
  int64_t episode_ = 0;
  int frags_ = 0;
  ButtonSet held_;
  std::ofstream record_;
  std::string record_path_;
  int record_count_ = 0;
  int64_t recorded_ = 0;
  int64_t decisions_ = 0;
  int64_t composite_ = 0;
};

// Keys held in the browser -> buttons. Unknown names are dropped; holding
// both rotations keeps turn_left.
ButtonSet ButtonsFromKeys(const nlohmann::json& keys);

}  // namespace microdoom

#endif  // MICRODOOM_PLAY_SESSION_H_

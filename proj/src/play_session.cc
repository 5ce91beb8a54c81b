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

#include "microdoom/play_session.h"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "microdoom/demo_dataset.h"
#include "microdoom/error.h"
#include "microdoom/nn_ops.h"

namespace microdoom {
namespace {

nlohmann::json ErrorMessage(const std::string& message, bool warning = false) {
  return {{"kind", "error"}, {"severity", warning ? "warning" : "error"}, {"message", message}};
}

EpisodeConfig WithSkip(EpisodeConfig c, int frame_skip) {
  c.frame_skip = frame_skip;
  return c;
}

}  // namespace

ButtonSet ButtonsFromKeys(const nlohmann::json& keys) {
  ButtonSet b;
  if (!keys.is_array()) return b;
  for (const auto& k : keys) {
    if (!k.is_string()) continue;
    if (auto a = ActionFromName(k.get<std::string>())) b.insert(*a);
  }
  if (b.contradictory()) b.erase(Action::kTurnRight);
  return b;
}

PlaySession::PlaySession(std::string id, SessionOptions options,
                         std::shared_ptr<const DoomEncoder> model)
    : id_(std::move(id)),
      options_(std::move(options)),
      model_(std::move(model)),
      arena_(WithSkip(options_.arena, options_.frame_skip)) {
  StartEpisode(options_.seed);
}

void PlaySession::StartEpisode(uint64_t seed) {
  episode_seed_ = seed;
  last_ = arena_.Reset(seed);
  frags_ = 0;
  last_frame_ = FrameMessage(last_, ButtonSet{}, std::nullopt);
}

double PlaySession::composite_rate() const {
  return decisions_ > 0 ? static_cast<double>(composite_) / decisions_ : 0.0;
}

nlohmann::json PlaySession::HelloMessage(bool resumed) const {
  return {{"kind", "hello"},
          {"version", kProtocolVersion},
          {"session", id_},
          {"resumed", resumed},
          {"frame_skip", options_.frame_skip},
          {"mode", mode_ == ControlMode::kHuman ? "human" : "agent"},
          {"shoot_ratio", options_.policy.shoot_ratio},
          {"second_threshold", options_.policy.second_threshold},
          {"record", recording() ? "on" : "off"},
          {"agent", model_ ? "model" : "expert"}};
}

nlohmann::json PlaySession::StatsMessage() const {
  return {{"kind", "stats"},
          {"decisions", decisions_},
          {"composite_rate", composite_rate()},
          {"frags", frags_},
          {"episode", episode_},
          {"seed", episode_seed_},
          {"mode", mode_ == ControlMode::kHuman ? "human" : "agent"},
          {"shoot_ratio", options_.policy.shoot_ratio},
          {"second_threshold", options_.policy.second_threshold},
          {"recording", recording()},
          {"recorded_frames", recorded_},
          {"record_path", record_path_}};
}

nlohmann::json PlaySession::CurrentFrame() const { return last_frame_; }

nlohmann::json PlaySession::FrameMessage(const StepResult& r, const ButtonSet& chosen,
                                         const std::optional<std::array<float, 4>>& probs) const {
  nlohmann::json digits = nlohmann::json::array();
  for (const std::string& row : DepthToDigitGrid(r.depth)) digits.push_back(row);
  nlohmann::json chosen_list = nlohmann::json::array();
  for (Action a : kAllActions) {
    if (chosen.contains(a)) chosen_list.push_back(std::string(ActionName(a)));
  }
  nlohmann::json j = {{"kind", "frame"},
                      {"tic", r.tic},
                      {"episode", episode_},
                      {"ascii", r.ascii.Serialize()},
                      {"depth_digits", digits},
                      {"chosen_buttons", chosen_list},
                      {"reward", r.reward},
                      {"frags", frags_},
                      {"health", arena_.state().health},
                      {"done", r.done}};
  if (probs) j["action_probs"] = *probs;
  return j;
}

std::vector<nlohmann::json> PlaySession::Handle(const nlohmann::json& msg) {
  if (!msg.is_object() || !msg.contains("kind") || !msg["kind"].is_string()) {
    return {ErrorMessage("message needs a string 'kind'")};
  }
  const std::string kind = msg["kind"].get<std::string>();
  if (kind == "hello") return {HelloMessage(false), CurrentFrame()};
  if (kind == "input") {
    nlohmann::json err = HandleInput(msg);
    if (err.is_null()) return {};
    return {err};
  }
  if (kind == "control") {
    std::vector<nlohmann::json> out;
    nlohmann::json warnings = HandleControl(msg);
    for (auto& w : warnings) out.push_back(std::move(w));
    out.push_back(StatsMessage());
    return out;
  }
  return {ErrorMessage("unknown kind '" + kind + "'")};
}

nlohmann::json PlaySession::HandleInput(const nlohmann::json& msg) {
  if (!msg.contains("keys") || !msg["keys"].is_array()) return ErrorMessage("input needs a 'keys' array");
  held_ = ButtonsFromKeys(msg["keys"]);
  return nullptr;
}

nlohmann::json PlaySession::HandleControl(const nlohmann::json& msg) {
  nlohmann::json out = nlohmann::json::array();
  auto threshold = [&](const char* key, double* target) {
    if (!msg.contains(key)) return;
    if (!msg[key].is_number()) {
      out.push_back(ErrorMessage(std::string(key) + " must be a number"));
      return;
    }
    const double v = msg[key].get<double>();
    const double c = std::isfinite(v) ? std::clamp(v, 0.0, 1.0) : 0.0;
    if (c != v) {
      out.push_back(ErrorMessage(std::string(key) + " clamped to " + nlohmann::json(c).dump(), true));
    }
    *target = c;
  };
  threshold("shoot_ratio", &options_.policy.shoot_ratio);
  threshold("second_threshold", &options_.policy.second_threshold);
  if (msg.contains("mode")) {
    const std::string m = msg["mode"].is_string() ? msg["mode"].get<std::string>() : "";
    if (m == "human") {
      mode_ = ControlMode::kHuman;
    } else if (m == "agent") {
      mode_ = ControlMode::kAgent;
    } else {
      out.push_back(ErrorMessage("mode must be human or agent"));
    }
  }
  if (msg.contains("record")) {
    const auto& r = msg["record"];
    const bool on = r.is_boolean() ? r.get<bool>() : (r.is_string() && r.get<std::string>() == "on");
    const bool off = r.is_boolean() ? !r.get<bool>() : (r.is_string() && r.get<std::string>() == "off");
    if (on && !recording()) {
      try {
        StartRecording();
      } catch (const Error& e) {
        out.push_back(ErrorMessage(e.what()));
      }
    } else if (off && recording()) {
      StopRecording();
    } else if (!on && !off) {
      out.push_back(ErrorMessage("record must be on or off"));
    }
  }
  if (msg.contains("reset_seed")) {
    if (msg["reset_seed"].is_number_unsigned() || msg["reset_seed"].is_number_integer()) {
      ++episode_;
      StartEpisode(msg["reset_seed"].get<uint64_t>());
    } else {
      out.push_back(ErrorMessage("reset_seed must be a non-negative integer"));
    }
  }
  return out;
}

void PlaySession::StartRecording() {
  std::filesystem::create_directories(options_.record_dir);
  const std::string name = "session-" + id_ + "-" + std::to_string(record_count_++) + kDemoExtension;
  record_path_ = (std::filesystem::path(options_.record_dir) / name).string();
  record_.open(record_path_, std::ios::trunc);
  if (!record_) Fail(ErrorKind::kIo, "cannot open " + record_path_);
}

void PlaySession::StopRecording() { record_.close(); }

nlohmann::json PlaySession::Tick() {
  ButtonSet chosen;
  std::optional<std::array<float, 4>> probs;
  if (mode_ == ControlMode::kAgent) {
    if (model_) {
      probs = model_->Forward(last_.ascii, last_.depth);
    } else {
      std::array<float, 4> p = ScriptedExpert(arena_.state()).scores;
      nn::SoftmaxInPlace<float>(p);
      probs = p;
    }
    chosen = SelectButtons(*probs, options_.policy);
  } else {
    chosen = held_;
    if (recording() && !chosen.empty()) {
      DemoMeta meta{episode_, last_.tic, "human"};
      record_ << RecordToJson(DemoRecord::FromFrame(last_.ascii, last_.depth, SoftScores(chosen), meta)).dump()
              << '\n';
      record_.flush();
      ++recorded_;
    }
  }
  const StepResult r = arena_.Step(chosen);
  if (r.reward > 0) frags_ += r.reward;
  ++decisions_;
  composite_ += chosen.size() >= 2;
  last_ = r;
  last_frame_ = FrameMessage(r, chosen, probs);
  nlohmann::json frame = last_frame_;
  if (r.done) {
    ++episode_;
    StartEpisode(episode_seed_ + 1);
  }
  return frame;
}

}  // namespace microdoom

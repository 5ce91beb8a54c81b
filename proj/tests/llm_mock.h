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

#ifndef MICRODOOM_TESTS_LLM_MOCK_H_
#define MICRODOOM_TESTS_LLM_MOCK_H_

#include <atomic>
#include <chrono>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"

namespace microdoom::testing {

inline constexpr char kExpectedPrompt[] =
    "You are an AI agent playing the classic game\n"
    "DOOM. Each turn you receive:\n"
    "1. The game view as ASCII art\n"
    "   (brightness: \" .:-=+*#%@\")\n"
    "2. A depth map with the same layout\n"
    "   (0=very near, 9=very far)\n"
    "\n"
    "Use both the ASCII view and depth map to\n"
    "decide your action.\n"
    "\n"
    "Available actions (respond with one or\n"
    "combine two with '+'):\n"
    "  shoot, move_forward, turn_left, turn_right\n"
    "\n"
    "Examples of valid responses:\n"
    "  shoot\n"
    "  move_forward\n"
    "  turn_left+shoot\n"
    "  move_forward+turn_right\n"
    "\n"
    "Respond with ONLY your chosen action(s).\n"
    "No explanation.";

// Scripted endpoint: the reply depends on the path.
class MockEndpoint {
 public:
  MockEndpoint() {
    auto reply = [](httplib::Response& res, const std::string& content) {
      nlohmann::json j = {{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}};
      res.set_content(j.dump(), "application/json");
    };
    server_.Post("/ok", [this, reply](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard<std::mutex> lock(mu_);
      bodies_.push_back(req.body);
      auth_ = req.get_header_value("Authorization");
      reply(res, "turn_left+shoot");
    });
    server_.Post("/garbage", [reply](const httplib::Request&, httplib::Response& res) { reply(res, "dunno"); });
    server_.Post("/500", [](const httplib::Request&, httplib::Response& res) { res.status = 500; });
    server_.Post("/401", [](const httplib::Request&, httplib::Response& res) { res.status = 401; });
    server_.Post("/badjson", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("{not json", "application/json");
    });
    server_.Post("/flaky", [this, reply](const httplib::Request&, httplib::Response& res) {
      if (flaky_++ % 2 == 0) {
        res.status = 503;
        return;
      }
      reply(res, "shoot");
    });
    server_.Post("/slow", [reply](const httplib::Request&, httplib::Response& res) {
      std::this_thread::sleep_for(std::chrono::milliseconds(600));
      reply(res, "shoot");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~MockEndpoint() {
    server_.stop();
    thread_.join();
  }
  std::string Url(const std::string& path) const { return "http://127.0.0.1:" + std::to_string(port_) + path; }
  std::vector<std::string> bodies() {
    std::lock_guard<std::mutex> lock(mu_);
    return bodies_;
  }
  std::string auth() {
    std::lock_guard<std::mutex> lock(mu_);
    return auth_;
  }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::mutex mu_;
  std::vector<std::string> bodies_;
  std::string auth_;
  std::atomic<int> flaky_{0};
};

}  // namespace microdoom::testing

#endif  // MICRODOOM_TESTS_LLM_MOCK_H_

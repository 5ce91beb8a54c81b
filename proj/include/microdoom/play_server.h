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

#ifndef MICRODOOM_PLAY_SERVER_H_
#define MICRODOOM_PLAY_SERVER_H_

// WebSocket + static-file server for the play console. One io thread; every
// session is driven from it. A client opens a WebSocket on any path, sends
// hello (optionally with a previous session id to resume) and then receives a
// frame every tick_ms while it stays connected.

#include <memory>
#include <string>

#include "microdoom/doom_encoder.h"
#include "microdoom/play_session.h"

namespace microdoom {

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::string static_dir;
  int tick_ms = 114;  // four tics at 35 Hz
  int stats_every = 9;
  SessionOptions session;
  std::shared_ptr<const DoomEncoder> model;
};

class PlayServer {
 public:
  explicit PlayServer(ServerOptions options);
  ~PlayServer();
  PlayServer(const PlayServer&) = delete;
  PlayServer& operator=(const PlayServer&) = delete;

  // Binds and listens. Throws Error(kPortInUse) if the address is taken.
  void Start();
  int port() const;

  // Blocks until Stop() or, with handle_signals, SIGINT/SIGTERM.
  void Run(bool handle_signals = false);
  void RunInBackground();
  void Stop();

  size_t session_count() const;

  struct Impl;  // opaque; connections in the .cc reach it

 private:
  std::unique_ptr<Impl> impl_;
};

}  // namespace microdoom

#endif  // MICRODOOM_PLAY_SERVER_H_

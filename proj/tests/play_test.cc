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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

// Eigen users first: <resolv.h>, pulled in by asio and httplib, defines _res.
#include "microdoom/demo_dataset.h"
#include "microdoom/error.h"
#include "microdoom/play_server.h"
#include "microdoom/play_session.h"
#include "microdoom/trainer.h"

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "httplib.h"

namespace microdoom {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path TempDir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<json> Control(PlaySession& s, json fields) {
  fields["kind"] = "control";
  return s.Handle(fields);
}

TEST(ButtonsFromKeysTest, Mapping) {
  EXPECT_EQ(ButtonsFromKeys(json{"turn_left", "turn_right"}), ButtonSet{Action::kTurnLeft});
  EXPECT_EQ(ButtonsFromKeys(json{"jump", "shoot", 3}), ButtonSet{Action::kShoot});
  EXPECT_TRUE(ButtonsFromKeys(json::array()).empty());
  EXPECT_TRUE(ButtonsFromKeys(json("shoot")).empty());
}

TEST(PlaySessionTest, HelloAndErrors) {
  PlaySession s("a", {}, nullptr);
  const auto hello = s.Handle({{"kind", "hello"}});
  ASSERT_EQ(hello.size(), 2u);
  EXPECT_EQ(hello[0]["kind"], "hello");
  EXPECT_EQ(hello[0]["version"], kProtocolVersion);
  EXPECT_EQ(hello[0]["session"], "a");
  EXPECT_EQ(hello[0]["mode"], "human");
  EXPECT_EQ(hello[1]["kind"], "frame");
  EXPECT_EQ(hello[1]["tic"], 0);
  EXPECT_EQ(hello[1]["ascii"].get<std::string>().size(), 1024u);
  EXPECT_EQ(hello[1]["depth_digits"].size(), 25u);
  for (const json& bad : {json(3), json{{"kind", "warp"}}, json{{"kind", "input"}}, json{{"kind", 1}}}) {
    const auto r = s.Handle(bad);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(r[0]["kind"], "error");
    EXPECT_EQ(r[0]["severity"], "error");
  }
  EXPECT_TRUE(s.Handle({{"kind", "input"}, {"keys", {"shoot"}}}).empty());
}

TEST(PlaySessionTest, HumanInputDrivesArena) {
  PlaySession s("h", {}, nullptr);
  s.Handle({{"kind", "input"}, {"keys", {"turn_left", "shoot"}}});
  const json f = s.Tick();
  EXPECT_EQ(f["tic"], 4);
  EXPECT_EQ(f["chosen_buttons"], (json{"shoot", "turn_left"}));
  EXPECT_FALSE(f.contains("action_probs"));
  EXPECT_EQ(s.CurrentFrame(), f);
  EXPECT_DOUBLE_EQ(s.composite_rate(), 1.0);
}

TEST(PlaySessionTest, ThresholdsClampWithWarning) {
  PlaySession s("c", {}, nullptr);
  const auto r = Control(s, {{"shoot_ratio", 1.01}, {"second_threshold", -2}});
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0]["severity"], "warning");
  EXPECT_EQ(r[1]["severity"], "warning");
  EXPECT_EQ(r[2]["kind"], "stats");
  EXPECT_EQ(s.policy().shoot_ratio, 1.0);
  EXPECT_EQ(s.policy().second_threshold, 0.0);
  EXPECT_EQ(Control(s, {{"shoot_ratio", "x"}})[0]["severity"], "error");
  EXPECT_EQ(Control(s, {{"mode", "robot"}})[0]["severity"], "error");
  EXPECT_EQ(Control(s, {{"shoot_ratio", 0.5}}).size(), 1u);
}

TEST(PlaySessionTest, ThresholdChangeAppliesToNextDecision) {
  PlaySession s("t", {}, nullptr);
  Control(s, {{"mode", "agent"}, {"shoot_ratio", 1.0}, {"second_threshold", 1.0}});
  for (int i = 0; i < 20; ++i) {
    const json f = s.Tick();
    EXPECT_EQ(f["chosen_buttons"].size(), 1u);
    ASSERT_TRUE(f.contains("action_probs"));
    float sum = 0;
    for (float p : f["action_probs"].get<std::vector<float>>()) sum += p;
    EXPECT_NEAR(sum, 1.0f, 1e-5);
  }
  EXPECT_EQ(s.composite_rate(), 0.0);
  Control(s, {{"second_threshold", 0.0}});
  EXPECT_GE(s.Tick()["chosen_buttons"].size(), 2u);
  EXPECT_GT(s.composite_rate(), 0.0);
}

TEST(PlaySessionTest, AgentModeUsesModel) {
  auto model = std::make_shared<DoomEncoder>(ModelConfig::Reduced(), InitModelParams(ModelConfig::Reduced(), 3));
  PlaySession s("m", {}, model);
  Control(s, {{"mode", "agent"}});
  const json before = s.CurrentFrame();
  const std::array<float, 4> expected =
      model->Forward(AsciiFrame::Parse(before["ascii"].get<std::string>()), Arena(EpisodeConfig{}).Reset(0).depth);
  const json f = s.Tick();
  const auto got = f["action_probs"].get<std::array<float, 4>>();
  for (int i = 0; i < 4; ++i) EXPECT_FLOAT_EQ(got[i], expected[i]);
  EXPECT_EQ(s.HelloMessage(false)["agent"], "model");
}

TEST(PlaySessionTest, RecordingWritesTrainableDemos) {
  const fs::path dir = TempDir("microdoom_play_rec");
  SessionOptions o;
  o.record_dir = dir.string();
  PlaySession s("r", o, nullptr);
  const auto st = Control(s, {{"record", "on"}});
  EXPECT_EQ(st.back()["recording"], true);
  ASSERT_TRUE(s.recording());
  // Idle ticks are not recorded.
  for (int i = 0; i < 5; ++i) s.Tick();
  EXPECT_EQ(s.recorded_frames(), 0);
  const char* keys[] = {"turn_left", "shoot", "turn_right"};
  for (int i = 0; i < 60; ++i) {
    s.Handle({{"kind", "input"}, {"keys", {keys[i % 3]}}});
    s.Tick();
  }
  Control(s, {{"record", false}});
  EXPECT_FALSE(s.recording());
  EXPECT_EQ(s.recorded_frames(), 60);
  EXPECT_EQ(fs::path(s.record_path()).parent_path(), dir);
  const std::vector<DemoRecord> recs = ReadJsonl(s.record_path());
  ASSERT_EQ(recs.size(), 60u);
  EXPECT_EQ(recs[0].meta.source, "human");
  EXPECT_EQ(HardLabel(recs[0].soft_scores), ActionIndex(Action::kTurnLeft));
  EXPECT_EQ(HardLabel(recs[1].soft_scores), ActionIndex(Action::kShoot));
  const DatasetSplit split = Split(recs, 1);
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 16;
  cfg.warmup_steps = 1;
  DoomEncoder m(ModelConfig::Reduced(), InitModelParams(ModelConfig::Reduced(), 0));
  EXPECT_EQ(Train(&m, split, cfg).epochs.size(), 2u);
  fs::remove_all(dir);
}

TEST(PlaySessionTest, ResetSeedRestartsEpisode) {
  PlaySession s("s", {}, nullptr);
  for (int i = 0; i < 3; ++i) s.Tick();
  const int64_t ep = s.CurrentFrame()["episode"];
  Control(s, {{"reset_seed", 7}});
  EXPECT_EQ(s.CurrentFrame()["tic"], 0);
  EXPECT_EQ(s.CurrentFrame()["episode"], ep + 1);
  EXPECT_EQ(s.StatsMessage()["seed"], 7);
}

// Minimal synchronous client.
class WsClient {
 public:
  explicit WsClient(int port) : ws_(ioc_) {
    boost::asio::ip::tcp::resolver resolver(ioc_);
    boost::asio::connect(ws_.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    ws_.handshake("127.0.0.1", "/ws");
  }
  void Send(const json& j) { ws_.write(boost::asio::buffer(j.dump())); }
  json Read() {
    boost::beast::flat_buffer buf;
    ws_.read(buf);
    return json::parse(boost::beast::buffers_to_string(buf.data()));
  }
  json ReadKind(const std::string& kind) {
    for (;;) {
      json j = Read();
      if (j["kind"] == kind) return j;
    }
  }
  bool ReadUntilClosed() {
    try {
      for (int i = 0; i < 1000; ++i) Read();
    } catch (const boost::system::system_error&) {
      return true;
    }
    return false;
  }

 private:
  boost::asio::io_context ioc_;
  boost::beast::websocket::stream<boost::asio::ip::tcp::socket> ws_;
};

class PlayServerTest : public ::testing::Test {
 protected:
  void SetUp() override {
    static_dir_ = TempDir("microdoom_play_static");
    std::ofstream(static_dir_ / "index.html") << "<html>console</html>";
    ServerOptions o;
    o.port = 0;
    o.tick_ms = 5;
    o.stats_every = 3;
    o.static_dir = static_dir_.string();
    server_ = std::make_unique<PlayServer>(o);
    server_->Start();
    server_->RunInBackground();
  }
  void TearDown() override {
    server_->Stop();
    fs::remove_all(static_dir_);
  }
  fs::path static_dir_;
  std::unique_ptr<PlayServer> server_;
};

TEST_F(PlayServerTest, StreamsFramesAndResumes) {
  std::string id;
  int last_tic = 0;
  {
    WsClient c(server_->port());
    c.Send({{"kind", "hello"}, {"version", kProtocolVersion}});
    const json hello = c.Read();
    ASSERT_EQ(hello["kind"], "hello");
    EXPECT_EQ(hello["resumed"], false);
    id = hello["session"];
    EXPECT_FALSE(id.empty());
    int tic = c.ReadKind("frame")["tic"];
    EXPECT_EQ(tic, 0);
    bool saw_stats = false;
    for (int n = 0; n < 10;) {
      const json m = c.Read();
      if (m["kind"] == "stats") {
        saw_stats = true;
        continue;
      }
      ASSERT_EQ(m["kind"], "frame");
      EXPECT_EQ(m["tic"], tic + 4);
      tic = m["tic"];
      ++n;
    }
    EXPECT_TRUE(saw_stats);
    c.Send({{"kind", "control"}, {"shoot_ratio", 0.4}});
    EXPECT_EQ(c.ReadKind("stats")["shoot_ratio"], 0.4);
    last_tic = tic;
  }
  WsClient again(server_->port());
  again.Send({{"kind", "hello"}, {"session", id}});
  const json hello = again.Read();
  EXPECT_EQ(hello["resumed"], true);
  EXPECT_EQ(hello["session"], id);
  EXPECT_EQ(hello["shoot_ratio"], 0.4);
  EXPECT_GE(again.ReadKind("frame")["tic"].get<int>(), last_tic);
  EXPECT_EQ(server_->session_count(), 1u);
}

TEST_F(PlayServerTest, NewConnectionTakesSessionOver) {
  WsClient a(server_->port());
  a.Send({{"kind", "hello"}, {"session", "shared"}});
  a.ReadKind("frame");
  WsClient b(server_->port());
  b.Send({{"kind", "hello"}, {"session", "shared"}});
  EXPECT_EQ(b.Read()["resumed"], true);
  EXPECT_TRUE(a.ReadUntilClosed());
  b.ReadKind("frame");
}

TEST_F(PlayServerTest, ProtocolErrors) {
  WsClient c(server_->port());
  c.Send({{"kind", "input"}, {"keys", json::array()}});
  EXPECT_EQ(c.Read()["kind"], "error");
  c.Send({{"kind", "hello"}, {"version", 99}});
  EXPECT_EQ(c.Read()["kind"], "error");
}

TEST_F(PlayServerTest, ServesStaticFiles) {
  httplib::Client http("127.0.0.1", server_->port());
  auto res = http.Get("/");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(res->body, "<html>console</html>");
  EXPECT_NE(res->get_header_value("Content-Type").find("text/html"), std::string::npos);
  res = http.Get("/missing.js");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);
  res = http.Get("/../etc/passwd");
  ASSERT_TRUE(res);
  EXPECT_NE(res->status, 200);
}

TEST_F(PlayServerTest, SecondBindReportsPortInUse) {
  ServerOptions o;
  o.port = server_->port();
  PlayServer other(o);
  try {
    other.Start();
    FAIL() << "second bind succeeded";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kPortInUse);
  }
}

}  // namespace
}  // namespace microdoom

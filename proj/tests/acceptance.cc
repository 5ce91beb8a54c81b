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

// Acceptance suite: one PASS/FAIL line per criterion. Arguments, if any,
// restrict the run to the named criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "microdoom/arena.h"
#include "microdoom/bench.h"
#include "microdoom/char_tokenizer.h"
#include "microdoom/checkpoint.h"
#include "microdoom/demo_dataset.h"
#include "microdoom/doom_encoder.h"
#include "microdoom/gemm.h"
#include "microdoom/llm_agent.h"
#include "microdoom/policy.h"
#include "microdoom/trainer.h"
#include "gradcheck.h"
#include "llm_mock.h"
#include "policy_reference.h"
#include "sample_frame.h"

namespace microdoom {
namespace {

using Clock = std::chrono::steady_clock;

double Since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;
  void Check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("FAILED ") + what;
    }
  }
  void Note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string Fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Outcome ParameterReconciliation() {
  Outcome o;
  const auto c = CountParameters(InitModelParams(ModelConfig{}, 0));
  std::ostringstream s;
  s << "embeddings " << c.embeddings << ", depth " << c.depth << ", transformer " << c.transformer << " (";
  for (size_t i = 0; i < c.per_layer.size(); ++i) s << (i ? " + " : "") << c.per_layer[i];
  s << "), head " << c.head << ", total " << c.total;
  o.Note(s.str());
  o.Check(c.embeddings == 4480, "embeddings");
  o.Check(c.depth == 2176, "depth");
  o.Check(c.transformer == 1312000, "transformer");
  o.Check(c.per_layer.size() == 5 && std::all_of(c.per_layer.begin(), c.per_layer.end(),
                                                 [](int64_t n) { return n == 262400; }),
          "per-layer");
  o.Check(c.head == 644, "head");
  o.Check(c.total == 1319300, "total");
  return o;
}

Outcome CheckpointSize() {
  Outcome o;
  const std::string bytes = SerializeCheckpoint({ModelConfig{}, InitModelParams(ModelConfig{}, 0), {}});
  const double mb = bytes.size() / 1e6;
  o.Note(std::to_string(bytes.size()) + " bytes = " + Fmt("%.3f MB", mb));
  o.Check(mb >= 5.2 && mb <= 5.6, "size in [5.2, 5.6] MB");
  const Checkpoint back = DeserializeCheckpoint(bytes);
  o.Check(SerializeCheckpoint(back) == bytes, "round trip");
  return o;
}

Outcome GradientCheck() {
  Outcome o;
  const ModelConfig cfg = ModelConfig::Reduced();
  o.Check(cfg.layers == 2 && cfg.hidden == 16 && cfg.vocab == 75, "reduced config shape");
  o.Check(testing::GradcheckSequence().size() == 12, "sequence length 12");
  const auto t0 = Clock::now();
  double worst = 0;
  std::ostringstream s;
  for (const auto& g : testing::RunGradcheck(cfg, 11)) {
    s << g.name << " " << Fmt("%.1e", g.rel_error) << " ";
    worst = std::max(worst, g.rel_error);
    o.Check(g.rel_error < 1e-3 && g.max_abs_analytic > 0, g.name);
  }
  o.Note("worst relative error " + Fmt("%.2e", worst) + " in " + Fmt("%.1f s", Since(t0)));
  o.Note(s.str());
  o.Check(Since(t0) < 60, "runtime < 1 min");
  return o;
}

Outcome CodecInvariants() {
  Outcome o;
  std::mt19937_64 rng(2026);
  int bad_len = 0, bad_tokens = 0, bad_decode = 0, bad_parse = 0, bad_bins = 0;
  const auto t0 = Clock::now();
  for (int t = 0; t < 10000; ++t) {
    const int w = 40 + static_cast<int>(rng() % 281), h = 25 + static_cast<int>(rng() % 176);
    RgbFrame f(w, h);
    for (auto& p : f.pixels) p = static_cast<uint8_t>(rng());
    DepthBuffer d(w, h);
    for (auto& v : d.values) v = static_cast<uint8_t>(rng());
    const AsciiFrame a = EncodeAscii(f);
    const DepthGrid g = QuantizeDepth(d);
    const std::string ser = a.Serialize();
    bad_len += ser.size() != 1024;
    const TokenSequence seq = Encode(a, g);
    bad_tokens += seq.size() != 1025 || seq.depth_bins.size() != 1025;
    bad_decode += Decode(seq) != ser;
    bad_parse += !(AsciiFrame::Parse(ser) == a);
    for (uint8_t b : g.bins) bad_bins += b > 15;
    for (int r = 0; r < kFrameRows; ++r)
      for (int c = 0; c < kFrameCols; ++c) bad_bins += seq.depth_bins[TokenIndex(r, c)] != g.at(r, c);
  }
  o.Note("10000 frames in " + Fmt("%.1f s", Since(t0)));
  o.Check(bad_len == 0, "serialized length 1024");
  o.Check(bad_tokens == 0, "encode length 1025");
  o.Check(bad_decode == 0, "decode(encode) identity");
  o.Check(bad_parse == 0, "parse(serialize) identity");
  o.Check(bad_bins == 0, "depth bins in [0,15]");
  std::string sample;
  for (int r = 0; r < 25; ++r) sample += testing::SampleFrameRows()[r] + (r < 24 ? "\n" : "");
  const AsciiFrame s = AsciiFrame::Parse(sample);
  o.Check(s.Serialize() == sample, "sample frame byte-exact");
  o.Check(Decode(Encode(s, DepthGrid{})) == sample, "sample frame through tokenizer");
  return o;
}

Outcome PolicyOracle() {
  Outcome o;
  const auto grid = testing::PolicyGrid();
  int mismatches = 0, ratio_edges = 0, threshold_edges = 0;
  for (const auto& p : grid) {
    mismatches += SelectButtons(p).bits() != testing::ReferenceSelect(p);
    const float top = *std::max_element(p.begin(), p.end());
    ratio_edges += p[0] == 0.75f * top;
    threshold_edges += std::count(p.begin() + 1, p.end(), 0.15f) > 0;
  }
  o.Note(std::to_string(grid.size()) + " vectors, " + std::to_string(ratio_edges) + " on the 0.75 ratio, " +
         std::to_string(threshold_edges) + " at 0.15, " + std::to_string(mismatches) + " mismatches");
  o.Check(grid.size() >= 10000, "grid size");
  o.Check(ratio_edges > 0 && threshold_edges > 0, "boundary cases present");
  o.Check(mismatches == 0, "agreement with reference");
  return o;
}

Outcome LearningSanity() {
  Outcome o;
  const auto t0 = Clock::now();
  std::vector<DemoRecord> demos = GenerateExpertDemos(4, 1);
  std::array<int, 4> label_counts{};
  for (const auto& r : demos) ++label_counts[HardLabel(r.soft_scores)];
  o.Note(std::to_string(demos.size()) + " expert frames, labels shoot/fwd/left/right " +
         std::to_string(label_counts[0]) + "/" + std::to_string(label_counts[1]) + "/" +
         std::to_string(label_counts[2]) + "/" + std::to_string(label_counts[3]));
  o.Check(demos.size() >= 2000, ">= 2000 frames");
  const DatasetSplit split = Split(std::move(demos), 1);
  std::array<int, 4> train_counts{};
  for (const auto& r : split.train) ++train_counts[HardLabel(r.soft_scores)];
  const int majority = static_cast<int>(std::max_element(train_counts.begin(), train_counts.end()) - train_counts.begin());
  double baseline = 0;
  for (const auto& r : split.val) baseline += HardLabel(r.soft_scores) == majority;
  baseline /= split.val.size();

  DoomEncoder model(ModelConfig{}, InitModelParams(ModelConfig{}, 0));
  TrainConfig cfg;  // 20 epochs, batch 32, lr 3e-4, warmup 500
  const TrainReport rep = Train(&model, split, cfg, [&](const EpochStats& e) {
    std::printf("  epoch %2d  train %.4f  val %.4f  acc %.3f  (%.0f s elapsed)\n", e.epoch,
                e.train_loss.value_or(NAN), e.val_loss, e.val_accuracy, Since(t0));
    std::fflush(stdout);
  });
  o.Note("best val accuracy " + Fmt("%.3f", rep.best_accuracy) + " at epoch " + std::to_string(rep.best_epoch) +
         " (chance 0.25, majority class " + Fmt("%.3f", baseline) + ")");
  o.Check(static_cast<int>(rep.epochs.size()) == cfg.epochs + 1, "20 epochs");
  o.Check(rep.best_accuracy > 0.45, "accuracy > 45%");

  BenchConfig bc;
  bc.episodes = 10;
  bc.seed_base = 500;
  ModelAgent trained(model);
  const BenchReport m = Summarize(trained.name(), trained.params(), RunEpisodes(trained, bc), bc);
  RandomAgent random;
  const BenchReport r = Summarize(random.name(), random.params(), RunEpisodes(random, bc), bc);
  o.Note("frags model " + std::to_string(m.total_frags) + " vs random " + std::to_string(r.total_frags) +
         ", composite rate " + Fmt("%.3f", m.composite_rate) + ", avg survival " + Fmt("%.1f", m.avg_survival));
  o.Check(m.total_frags > r.total_frags, "frags beat random");
  o.Check(m.composite_rate > 0.2, "composite rate > 20%");
  o.Note(Fmt("%.0f s total", Since(t0)));
  o.Check(Since(t0) <= 2 * 3600, "runtime <= 2 h");
  return o;
}

Outcome Latency() {
  Outcome o;
  const DoomEncoder model(ModelConfig{}, InitModelParams(ModelConfig{}, 0));
  const LatencyStats s = LatencyBench(model, 100, 7);
  o.Note("p50 " + Fmt("%.2f ms", s.p50_ms) + ", p95 " + Fmt("%.2f ms", s.p95_ms) + ", max " +
         Fmt("%.2f ms", s.max_ms) + ", bf16 matmul " + (nn::Bf16MatmulEnabled() ? "on" : "off"));
  o.Check(s.samples == 100, "100 samples");
  o.Check(s.p50_ms < 50, "p50 < 50 ms");
  return o;
}

Outcome BenchmarkMechanics() {
  Outcome o;
  RandomAgent random;
  ExpertAgent expert;
  for (int skip : {4, 20}) {
    BenchConfig bc;
    bc.frame_skip = skip;
    bc.seed_base = 40;
    const int cap = skip == 4 ? 525 : 105;
    for (Agent* a : {static_cast<Agent*>(&random), static_cast<Agent*>(&expert)}) {
      const auto results = RunEpisodes(*a, bc);
      int max_surv = 0;
      for (const auto& e : results) {
        max_surv = std::max(max_surv, e.survival_steps);
        o.Check(e.frags == e.kill_events, a->name() + " frags vs kill events");
        int replayed = 0;
        for (const StepResult& st : RunReplay({e.seed, [&] {
               EpisodeConfig c = bc.arena;
               c.frame_skip = skip;
               return c;
             }(), e.actions}))
          replayed += std::max(st.reward, 0);
        o.Check(replayed == e.frags, a->name() + " replay frags");
      }
      o.Check(max_surv <= cap, a->name() + " survival cap at skip " + std::to_string(skip));
      if (a == &expert) o.Check(max_surv == cap, "expert reaches the cap at skip " + std::to_string(skip));
      o.Note(a->name() + " skip " + std::to_string(skip) + " max survival " + std::to_string(max_surv));
    }
  }
  BenchConfig bc;
  bc.episodes = 3;
  bc.seed_base = 77;
  ModelAgent m1(DoomEncoder(ModelConfig::Reduced(), InitModelParams(ModelConfig::Reduced(), 2)));
  ModelAgent m2(DoomEncoder(ModelConfig::Reduced(), InitModelParams(ModelConfig::Reduced(), 2)));
  ExpertAgent e2;
  o.Check(Summarize("m", "", RunEpisodes(m1, bc), bc).ToJson(false) ==
              Summarize("m", "", RunEpisodes(m2, bc), bc).ToJson(false),
          "model reports reproduce");
  o.Check(Summarize("e", "", RunEpisodes(expert, bc), bc).ToJson(false) ==
              Summarize("e", "", RunEpisodes(e2, bc), bc).ToJson(false),
          "expert reports reproduce");
  o.Check(Summarize("r", "", RunEpisodes(random, bc), bc).ToJson(false) ==
              Summarize("r", "", RunEpisodes(random, bc), bc).ToJson(false),
          "random reports reproduce");
  return o;
}

Outcome LlmProtocol() {
  Outcome o;
  o.Check(BuildSystemPrompt() == testing::kExpectedPrompt, "system prompt byte-exact");
  const AsciiFrame frame = AsciiFrame::FromRows(testing::SampleFrameRows());
  DepthGrid depth;
  for (int i = 0; i < kFrameCells; ++i) depth.bins[i] = static_cast<uint8_t>(i % 16);
  const DigitGrid digits = DepthToDigitGrid(depth);
  std::string user = "View:\n```\n" + frame.Serialize() + "\n```\n\nDepth (0=near, 9=far):\n```\n";
  for (int r = 0; r < 25; ++r) user += digits[r] + (r < 24 ? "\n" : "");
  user += "\n```";
  o.Check(BuildUserMessage(frame, digits) == user, "user message layout");

  using A = Action;
  o.Check(ParseAction("shoot").buttons == ButtonSet{A::kShoot}, "parse shoot");
  o.Check(ParseAction("move_forward").buttons == ButtonSet{A::kMoveForward}, "parse move_forward");
  o.Check(ParseAction("turn_left+shoot").buttons == (ButtonSet{A::kTurnLeft, A::kShoot}), "parse turn_left+shoot");
  o.Check(ParseAction("move_forward+turn_right").buttons == (ButtonSet{A::kMoveForward, A::kTurnRight}),
          "parse move_forward+turn_right");
  const ParsedAction junk = ParseAction("I think I should run away");
  o.Check(junk.parse_miss && junk.buttons == ButtonSet{A::kTurnLeft}, "garbage fallback");

  testing::MockEndpoint mock;
  std::map<std::string, std::string> expect = {
      {"/ok", ""}, {"/garbage", "ParseMiss"}, {"/500", "HttpError"}, {"/401", "AuthError"}, {"/slow", "Timeout"}};
  int checked = 0;
  for (const auto& [path, kind] : expect) {
    LlmAgentConfig cfg = LlmAgentConfig::Defaults(LlmMode::kStandard);
    cfg.endpoint = mock.Url(path);
    cfg.model = "mock";
    cfg.timeout_s = 0.3;
    LlmClient client(cfg);
    for (int i = 0; i < 2; ++i) client.Decide(frame, digits);
    auto t = client.tallies();
    bool ok = t["requests"] == 2;
    if (!kind.empty()) ok = ok && t[kind] == 2 && t.size() == 2;
    else ok = ok && t.size() == 1;
    o.Check(ok, "tallies for " + path);
    checked += ok;
  }
  const auto bodies = mock.bodies();
  o.Check(bodies.size() == 2 && bodies[0] == bodies[1], "stateless identical requests");
  if (!bodies.empty()) {
    const auto j = nlohmann::json::parse(bodies[0]);
    o.Check(j["messages"].size() == 2 && j["messages"][0]["content"] == testing::kExpectedPrompt &&
                j["messages"][1]["content"] == user,
            "request carries the prompts");
  }
  o.Note(std::to_string(checked) + "/" + std::to_string(expect.size()) + " endpoint scripts tallied correctly");
  return o;
}

}  // namespace
}  // namespace microdoom

int main(int argc, char** argv) {
  using namespace microdoom;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"parameter_counts", ParameterReconciliation}, {"checkpoint_size", CheckpointSize},
      {"gradient_check", GradientCheck},     {"codec_invariants", CodecInvariants},
      {"policy_oracle", PolicyOracle},       {"learning_sanity", LearningSanity},
      {"latency", Latency},                  {"benchmark_mechanics", BenchmarkMechanics},
      {"llm_protocol", LlmProtocol},
  };
  std::set<std::string> only(argv + 1, argv + argc);
  int failed = 0, ran = 0;
  for (const auto& [name, fn] : criteria) {
    if (!only.empty() && !only.count(name)) continue;
    ++ran;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail += std::string("exception: ") + e.what();
    }
    failed += !o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}

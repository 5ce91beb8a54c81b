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

// microdoom: generate expert demos, train, benchmark, measure latency and
// serve the play console.
//
// Exit codes: 0 success, 1 usage, 2 runtime error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "microdoom/bench.h"
#include "microdoom/checkpoint.h"
#include "microdoom/demo_dataset.h"
#include "microdoom/doom_encoder.h"
#include "microdoom/error.h"
#include "microdoom/gemm.h"
#include "microdoom/llm_agent.h"
#include "microdoom/play_server.h"
#include "microdoom/trainer.h"

namespace microdoom {
namespace {

struct PolicyFlags {
  double shoot_ratio = 0.75;
  double second_threshold = 0.15;
  PolicyConfig Config() const { return {shoot_ratio, second_threshold}; }
};

void AddPolicyFlags(CLI::App* cmd, PolicyFlags* f) {
  cmd->add_option("--shoot-ratio", f->shoot_ratio, "Add SHOOT when p_shoot > ratio * p_top")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd->add_option("--second-threshold", f->second_threshold, "Minimum probability of a second action")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
}

ModelConfig ConfigByName(const std::string& name) {
  return name == "reduced" ? ModelConfig::Reduced() : ModelConfig{};
}

std::string WithCommas(int64_t v) {
  std::string s = std::to_string(v);
  for (int i = static_cast<int>(s.size()) - 3; i > 0; i -= 3) s.insert(static_cast<size_t>(i), ",");
  return s;
}

// ---------------------------------------------------------------- expert-gen

struct ExpertGenFlags {
  int episodes = 1;
  uint64_t seed = 0;
  int frame_skip = 4;
  std::string out;
};

int RunExpertGen(const ExpertGenFlags& f) {
  EpisodeConfig arena;
  arena.frame_skip = f.frame_skip;
  const std::vector<DemoRecord> records = GenerateExpertDemos(f.episodes, f.seed, arena);
  WriteJsonl(records, f.out);
  std::array<int64_t, 4> counts{};
  for (const auto& r : records) ++counts[HardLabel(r.soft_scores)];
  std::cout << "wrote " << records.size() << " records to " << f.out << "\n";
  for (Action a : kAllActions) {
    const int64_t c = counts[ActionIndex(a)];
    std::printf("  %-13s %7lld  %5.1f%%\n", std::string(ActionName(a)).c_str(), static_cast<long long>(c),
                records.empty() ? 0.0 : 100.0 * c / records.size());
  }
  return 0;
}

// ---------------------------------------------------------------------- train

struct TrainFlags {
  std::string data;
  std::string out;
  std::string report;
  std::string model = "full";
  std::string init;
  int epochs = 20;
  int batch = 32;
  double lr = 3e-4;
  int warmup = 500;
  double val_fraction = 0.1;
  uint64_t seed = 0;
  std::string kl = "student-first";
};

int RunTrain(TrainFlags f) {
  if (f.epochs < 1) Fail(ErrorKind::kInvalidArgument, "nothing to train (--epochs " + std::to_string(f.epochs) + ")");
  DatasetSplit split = Split(ReadJsonl(f.data), f.seed, f.val_fraction);
  ModelConfig config;
  ModelParams params;
  if (!f.init.empty()) {
    Checkpoint c = LoadCheckpoint(f.init);
    config = c.config;
    params = std::move(c.params);
  } else {
    config = ConfigByName(f.model);
    params = InitModelParams(config, f.seed);
  }
  DoomEncoder model(config, std::move(params));

  TrainConfig tc;
  tc.batch_size = f.batch;
  tc.epochs = f.epochs;
  tc.base_lr = f.lr;
  tc.seed = f.seed;
  tc.checkpoint_path = f.out;
  tc.direction = f.kl == "teacher-first" ? KlDirection::kTeacherFirst : KlDirection::kStudentFirst;
  const int64_t steps = static_cast<int64_t>((split.train.size() + f.batch - 1) / f.batch) * f.epochs;
  tc.warmup_steps = f.warmup;
  if (tc.warmup_steps >= steps) {
    tc.warmup_steps = static_cast<int>(steps / 10);
    std::cerr << "note: warmup " << f.warmup << " >= " << steps << " total steps, using " << tc.warmup_steps
              << "\n";
  }
  std::cout << "train " << split.train.size() << " / val " << split.val.size() << ", " << steps << " steps\n";
  const TrainReport report = Train(&model, split, tc, [](const EpochStats& e) {
    std::printf("epoch %3d  train_loss %s  val_loss %.4f  val_acc %.4f  %.1fs\n", e.epoch,
                e.train_loss ? std::to_string(*e.train_loss).c_str() : "     -  ", e.val_loss, e.val_accuracy,
                e.seconds);
    std::fflush(stdout);
  });
  const std::string report_path = f.report.empty() ? f.out + ".report.json" : f.report;
  std::ofstream(report_path) << report.ToJson().dump(2) << "\n";
  std::cout << "best epoch " << report.best_epoch << " accuracy " << report.best_accuracy << "\nwrote " << f.out
            << " and " << report_path << "\n";
  return 0;
}

// ---------------------------------------------------------------------- bench

struct BenchFlags {
  std::string agent;
  int episodes = 10;
  int frame_skip = 4;
  uint64_t seed = 0;
  std::string ckpt;
  std::string endpoint;
  std::string llm_model;
  std::string api_key_env = "OPENAI_API_KEY";
  std::string mode = "reasoning";
  double timeout_s = 60;
  int retries = 0;
  std::string transcript;
  std::string trace;
  std::string report;
  bool realtime = false;
  PolicyFlags policy;
};

bool IsLocalEndpoint(const std::string& url) {
  for (const char* host : {"://localhost", "://127.0.0.1", "://[::1]"}) {
    if (url.find(host) != std::string::npos) return true;
  }
  return false;
}

std::unique_ptr<Agent> MakeAgent(const BenchFlags& f) {
  if (f.agent == "random") return std::make_unique<RandomAgent>();
  if (f.agent == "expert") return std::make_unique<ExpertAgent>();
  if (f.agent == "model") {
    if (f.ckpt.empty()) Fail(ErrorKind::kMissingConfig, "--agent model needs --ckpt");
    Checkpoint c = LoadCheckpoint(f.ckpt);
    return std::make_unique<ModelAgent>(DoomEncoder(c.config, std::move(c.params)), f.policy.Config());
  }
  // llm
  if (f.llm_model.empty()) Fail(ErrorKind::kMissingConfig, "--agent llm needs --llm-model");
  LlmAgentConfig cfg = LlmAgentConfig::Defaults(f.mode == "standard" ? LlmMode::kStandard : LlmMode::kReasoning);
  if (!f.endpoint.empty()) cfg.endpoint = f.endpoint;
  cfg.model = f.llm_model;
  cfg.api_key_env = f.api_key_env;
  cfg.timeout_s = f.timeout_s;
  cfg.retries = f.retries;
  cfg.transcript_path = f.transcript;
  const char* key = std::getenv(cfg.api_key_env.c_str());
  if ((key == nullptr || *key == '\0') && !IsLocalEndpoint(cfg.endpoint)) {
    Fail(ErrorKind::kAuth, "$" + cfg.api_key_env + " is not set for " + cfg.endpoint);
  }
  return std::make_unique<LlmBenchAgent>(cfg);
}

int RunBench(const BenchFlags& f) {
  std::unique_ptr<Agent> agent = MakeAgent(f);
  BenchConfig cfg;
  cfg.episodes = f.episodes;
  cfg.frame_skip = f.frame_skip;
  cfg.seed_base = f.seed;
  cfg.realtime = f.realtime;
  cfg.trace_path = f.trace;
  const std::vector<EpisodeResult> results = RunEpisodes(*agent, cfg);
  const BenchReport report = Summarize(agent->name(), agent->params(), results, cfg);
  std::cout << FormatTable({report});
  if (!report.errors.empty() || report.parse_misses > 0) {
    std::cout << "errors:";
    for (const auto& [k, v] : report.errors) std::cout << " " << k << "=" << v;
    std::cout << " ParseMiss=" << report.parse_misses << "\n";
  }
  if (!f.report.empty()) std::ofstream(f.report) << report.ToJson().dump(2) << "\n";
  auto auth = report.errors.find("AuthError");
  if (auth != report.errors.end() && auth->second == report.total_decisions) {
    Fail(ErrorKind::kAuth, "every request was rejected by " + f.endpoint);
  }
  return 0;
}

// ---------------------------------------------------------------------- serve

struct ServeFlags {
  int port = 8080;
  std::string host = "127.0.0.1";
  std::string static_dir;
  std::string ckpt;
  std::string record_dir = ".";
  uint64_t seed = 0;
  int tick_ms = 114;
  int frame_skip = 4;
  PolicyFlags policy;
};

int RunServe(const ServeFlags& f) {
  ServerOptions o;
  o.host = f.host;
  o.port = f.port;
  o.static_dir = f.static_dir;
  o.tick_ms = f.tick_ms;
  o.session.frame_skip = f.frame_skip;
  o.session.seed = f.seed;
  o.session.record_dir = f.record_dir;
  o.session.policy = f.policy.Config();
  if (!f.ckpt.empty()) {
    Checkpoint c = LoadCheckpoint(f.ckpt);
    o.model = std::make_shared<const DoomEncoder>(c.config, std::move(c.params));
  }
  PlayServer server(o);
  server.Start();
  std::cout << "serving on ws://" << f.host << ":" << server.port() << "/ ("
            << (o.model ? "model" : "expert") << " agent)" << std::endl;
  server.Run(/*handle_signals=*/true);
  return 0;
}

// -------------------------------------------------------------- latency/params

int RunLatency(const std::string& ckpt, int samples, uint64_t seed, const PolicyFlags& policy) {
  std::optional<DoomEncoder> model;
  if (ckpt.empty()) {
    model.emplace(ModelConfig{}, InitModelParams(ModelConfig{}, seed));
  } else {
    Checkpoint c = LoadCheckpoint(ckpt);
    model.emplace(c.config, std::move(c.params));
  }
  const LatencyStats s = LatencyBench(*model, samples, seed, policy.Config());
  nlohmann::json j = s.ToJson();
  j["bf16_matmul"] = nn::Bf16MatmulEnabled();
  std::cout << j.dump(2) << "\n";
  return 0;
}

int RunParams(const std::string& ckpt, const std::string& model_name) {
  Checkpoint c;
  if (ckpt.empty()) {
    c.config = ConfigByName(model_name);
    c.params = InitModelParams(c.config, 0);
  } else {
    c = LoadCheckpoint(ckpt);
  }
  const ParameterCounts p = CountParameters(c.params);
  std::printf("embeddings   %12s\n", WithCommas(p.embeddings).c_str());
  std::printf("depth        %12s\n", WithCommas(p.depth).c_str());
  std::printf("transformer  %12s", WithCommas(p.transformer).c_str());
  if (!p.per_layer.empty()) std::printf("  (%s x %zu)", WithCommas(p.per_layer[0]).c_str(), p.per_layer.size());
  std::printf("\nhead         %12s\ntotal        %12s\n", WithCommas(p.head).c_str(), WithCommas(p.total).c_str());
  const size_t bytes = SerializeCheckpoint(c).size();
  std::printf("checkpoint   %12s bytes (%.2f MB)\n", WithCommas(static_cast<int64_t>(bytes)).c_str(), bytes / 1e6);
  return 0;
}

int Main(int argc, char** argv) {
  CLI::App app{"microdoom: tiny ASCII-view DOOM agent"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI file with defaults; flags override it");

  ExpertGenFlags eg;
  auto* expert = app.add_subcommand("expert-gen", "Record scripted-expert demonstrations");
  expert->add_option("--episodes", eg.episodes)->check(CLI::PositiveNumber)->capture_default_str();
  expert->add_option("--seed", eg.seed)->capture_default_str();
  expert->add_option("--frame-skip", eg.frame_skip)->check(CLI::IsMember({4, 20}))->capture_default_str();
  expert->add_option("--out", eg.out, "Output .demo.jsonl")->required();

  TrainFlags tf;
  auto* train = app.add_subcommand("train", "Behavioral cloning on a demo file");
  train->add_option("--data", tf.data, "Demo JSONL")->required();
  train->add_option("--out", tf.out, "Best checkpoint path")->required();
  train->add_option("--report", tf.report, "JSON report path (default <out>.report.json)");
  train->add_option("--model", tf.model)->check(CLI::IsMember({"full", "reduced"}))->capture_default_str();
  train->add_option("--init", tf.init, "Start from this checkpoint instead of random weights");
  train->add_option("--epochs", tf.epochs)->capture_default_str();
  train->add_option("--batch", tf.batch)->check(CLI::PositiveNumber)->capture_default_str();
  train->add_option("--lr", tf.lr)->capture_default_str();
  train->add_option("--warmup", tf.warmup)->check(CLI::NonNegativeNumber)->capture_default_str();
  train->add_option("--val-fraction", tf.val_fraction)->check(CLI::Range(0.0, 1.0))->capture_default_str();
  train->add_option("--seed", tf.seed)->capture_default_str();
  train->add_option("--kl", tf.kl, "Loss direction")
      ->check(CLI::IsMember({"student-first", "teacher-first"}))
      ->capture_default_str();

  BenchFlags bf;
  auto* bench = app.add_subcommand("bench", "Run seeded closed-loop episodes");
  bench->add_option("--agent", bf.agent)->required()->check(CLI::IsMember({"model", "llm", "random", "expert"}));
  bench->add_option("--episodes", bf.episodes)->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--frame-skip", bf.frame_skip)->check(CLI::IsMember({4, 20}))->capture_default_str();
  bench->add_option("--seed", bf.seed, "Episode i uses seed + i")->capture_default_str();
  bench->add_option("--ckpt", bf.ckpt, "Checkpoint for --agent model");
  bench->add_option("--endpoint", bf.endpoint, "Chat-completions URL for --agent llm");
  bench->add_option("--llm-model", bf.llm_model, "Model name sent to the endpoint");
  bench->add_option("--api-key-env", bf.api_key_env)->capture_default_str();
  bench->add_option("--mode", bf.mode)->check(CLI::IsMember({"reasoning", "standard"}))->capture_default_str();
  bench->add_option("--timeout", bf.timeout_s, "Seconds per LLM request")->capture_default_str();
  bench->add_option("--retries", bf.retries)->check(CLI::NonNegativeNumber)->capture_default_str();
  bench->add_option("--transcript", bf.transcript, "LLM exchange log (JSONL)");
  bench->add_option("--trace", bf.trace, "Per-decision trace (JSONL)");
  bench->add_option("--report", bf.report, "Write the report as JSON");
  bench->add_flag("--realtime", bf.realtime, "Pace decisions at 35 Hz game time");
  AddPolicyFlags(bench, &bf.policy);

  ServeFlags sf;
  auto* serve = app.add_subcommand("serve", "Play-console backend (WebSocket + static files)");
  serve->add_option("--port", sf.port)->check(CLI::Range(0, 65535))->capture_default_str();
  serve->add_option("--host", sf.host)->capture_default_str();
  serve->add_option("--static-dir", sf.static_dir, "Directory served over HTTP");
  serve->add_option("--ckpt", sf.ckpt, "Model for agent mode (default: scripted expert)");
  serve->add_option("--record-dir", sf.record_dir)->capture_default_str();
  serve->add_option("--seed", sf.seed)->capture_default_str();
  serve->add_option("--tick-ms", sf.tick_ms)->check(CLI::PositiveNumber)->capture_default_str();
  serve->add_option("--frame-skip", sf.frame_skip)->check(CLI::IsMember({4, 20}))->capture_default_str();
  AddPolicyFlags(serve, &sf.policy);

  std::string lat_ckpt;
  int lat_samples = 100;
  uint64_t lat_seed = 0;
  PolicyFlags lat_policy;
  auto* latency = app.add_subcommand("latency", "Forward + policy timing on random frames");
  latency->add_option("--ckpt", lat_ckpt, "Default: freshly initialized full model");
  latency->add_option("--samples", lat_samples)->check(CLI::PositiveNumber)->capture_default_str();
  latency->add_option("--seed", lat_seed)->capture_default_str();
  AddPolicyFlags(latency, &lat_policy);

  std::string par_ckpt;
  std::string par_model = "full";
  auto* params = app.add_subcommand("params", "Parameter counts and checkpoint size");
  params->add_option("--ckpt", par_ckpt);
  params->add_option("--model", par_model)->check(CLI::IsMember({"full", "reduced"}))->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*expert) return RunExpertGen(eg);
    if (*train) return RunTrain(tf);
    if (*bench) return RunBench(bf);
    if (*serve) return RunServe(sf);
    if (*latency) return RunLatency(lat_ckpt, lat_samples, lat_seed, lat_policy);
    if (*params) return RunParams(par_ckpt, par_model);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace
}  // namespace microdoom

int main(int argc, char** argv) { return microdoom::Main(argc, argv); }

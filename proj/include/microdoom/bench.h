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

#ifndef MICRODOOM_BENCH_H_
#define MICRODOOM_BENCH_H_

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "microdoom/arena.h"
#include "microdoom/doom_encoder.h"
#include "microdoom/policy.h"

namespace microdoom {

struct Observation {
  const AsciiFrame* ascii = nullptr;
  const DepthGrid* depth = nullptr;
  // Ground truth for scripted agents only; learned and LLM agents ignore it.
  const ArenaState* state = nullptr;
};

struct Decision {
  ButtonSet buttons;
  double latency_ms = 0;
  bool parse_miss = false;
  std::optional<std::array<float, 4>> probs;
  std::optional<std::string> error;  // error kind name, e.g. "Timeout"
};

class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::string name() const = 0;
  // Parameter count as printed in reports, or "proprietary".
  virtual std::string params() const = 0;
  // Same seed and frames give the same decisions.
  virtual bool deterministic() const { return true; }
  virtual void BeginEpisode(uint64_t /*seed*/) {}
  // Must not throw; failures become a fallback decision with `error` set.
  virtual Decision Decide(const Observation& obs) = 0;
};

class ModelAgent : public Agent {
 public:
  ModelAgent(DoomEncoder model, PolicyConfig policy = {});
  std::string name() const override { return "microdoom"; }
  std::string params() const override;
  Decision Decide(const Observation& obs) override;
  PolicyConfig& policy() { return policy_; }

 private:
  DoomEncoder model_;
  PolicyConfig policy_;
};

// One uniformly drawn single action per decision, reseeded per episode.
class RandomAgent : public Agent {
 public:
  std::string name() const override { return "random"; }
  std::string params() const override { return "0"; }
  void BeginEpisode(uint64_t seed) override { rng_.seed(seed ^ 0x9E3779B97F4A7C15ULL); }
  Decision Decide(const Observation& obs) override;

 private:
  std::mt19937_64 rng_;
};

class ExpertAgent : public Agent {
 public:
  std::string name() const override { return "expert"; }
  std::string params() const override { return "0"; }
  Decision Decide(const Observation& obs) override;
};

struct BenchConfig {
  int episodes = 10;
  int frame_skip = 4;
  uint64_t seed_base = 0;
  bool realtime = false;   // sleep so each decision spans frame_skip tics at 35 Hz
  std::string trace_path;  // per-decision JSONL, empty to skip
  EpisodeConfig arena;     // frame_skip here is overridden
};

struct EpisodeResult {
  uint64_t seed = 0;
  int survival_steps = 0;
  int frags = 0;        // sum of positive rewards
  int kill_events = 0;  // arena's own kill log
  bool died = false;
  std::vector<double> latencies_ms;
  std::map<std::string, int> histogram;  // button set -> count
  int composite = 0;
  int parse_misses = 0;
  std::map<std::string, int> errors;
  std::vector<ButtonSet> actions;  // replayable with the seed
};

// Agent exceptions are tallied as errors and replaced by {turn_left}.
std::vector<EpisodeResult> RunEpisodes(Agent& agent, const BenchConfig& cfg);

struct BenchReport {
  std::string agent;
  std::string params;
  int episodes = 0;
  int frame_skip = 4;
  uint64_t seed_base = 0;
  double avg_survival = 0;
  int max_survival = 0;
  int64_t total_frags = 0;
  int64_t total_decisions = 0;
  double mean_latency_ms = 0;
  double composite_rate = 0;
  int64_t parse_misses = 0;
  std::map<std::string, int64_t> errors;
  std::map<std::string, int64_t> histogram;

  // Timing fields vary run to run; leaving them out makes the JSON
  // comparable byte for byte.
  nlohmann::json ToJson(bool include_timing = true) const;
};

// Throws kEmptyResults.
BenchReport Summarize(const std::string& agent, const std::string& params,
                      const std::vector<EpisodeResult>& results, const BenchConfig& cfg);

// Agent | Params | Ep. | Avg Surv. | Max Surv. | Frags | Lat. | Comp.
std::string FormatTable(const std::vector<BenchReport>& reports);

struct LatencyStats {
  int samples = 0;
  double p50_ms = 0;
  double p95_ms = 0;
  double max_ms = 0;
  double mean_ms = 0;
  nlohmann::json ToJson() const;
};

// Nearest-rank percentiles over n random frames, forward plus policy.
LatencyStats LatencyBench(const DoomEncoder& model, int n = 100, uint64_t seed = 0,
                          const PolicyConfig& policy = {});
LatencyStats ComputeLatencyStats(std::vector<double> samples);

// Uniformly random palette frame and depth grid.
std::pair<AsciiFrame, DepthGrid> RandomFrame(std::mt19937_64& rng);

}  // namespace microdoom

#endif  // MICRODOOM_BENCH_H_

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

#include "microdoom/bench.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "microdoom/char_tokenizer.h"
#include "microdoom/error.h"

namespace microdoom {
namespace {

using Clock = std::chrono::steady_clock;

double Ms(Clock::duration d) { return std::chrono::duration<double, std::milli>(d).count(); }

std::string WithCommas(int64_t v) {
  std::string s = std::to_string(v);
  for (int i = static_cast<int>(s.size()) - 3; i > 0; i -= 3) s.insert(i, ",");
  return s;
}

}  // namespace

ModelAgent::ModelAgent(DoomEncoder model, PolicyConfig policy)
    : model_(std::move(model)), policy_(policy) {}

std::string ModelAgent::params() const { return WithCommas(CountParameters(model_.params()).total); }

Decision ModelAgent::Decide(const Observation& obs) {
  const auto t0 = Clock::now();
  Decision d;
  const ActionProbs p = model_.Forward(*obs.ascii, *obs.depth);
  d.buttons = SelectButtons(p, policy_);
  d.probs = p;
  d.latency_ms = Ms(Clock::now() - t0);
  return d;
}

Decision RandomAgent::Decide(const Observation&) {
  Decision d;
  d.buttons = {kAllActions[rng_() % kNumActions]};
  return d;
}

Decision ExpertAgent::Decide(const Observation& obs) {
  const auto t0 = Clock::now();
  if (obs.state == nullptr) Fail(ErrorKind::kInvalidArgument, "expert needs the arena state");
  Decision d;
  d.buttons = ScriptedExpert(*obs.state).buttons;
  d.latency_ms = Ms(Clock::now() - t0);
  return d;
}

std::vector<EpisodeResult> RunEpisodes(Agent& agent, const BenchConfig& cfg) {
  if (cfg.episodes < 1) Fail(ErrorKind::kInvalidArgument, "episodes must be >= 1");
  if (cfg.frame_skip != 4 && cfg.frame_skip != 20) {
    Fail(ErrorKind::kInvalidArgument, "frame_skip must be 4 or 20");
  }
  EpisodeConfig ec = cfg.arena;
  ec.frame_skip = cfg.frame_skip;
  std::ofstream trace;
  if (!cfg.trace_path.empty()) {
    trace.open(cfg.trace_path, std::ios::trunc);
    if (!trace) Fail(ErrorKind::kIo, "cannot open " + cfg.trace_path);
  }
  const auto tic_period = std::chrono::nanoseconds(1'000'000'000LL / 35);

  std::vector<EpisodeResult> out;
  for (int ep = 0; ep < cfg.episodes; ++ep) {
    EpisodeResult res;
    res.seed = cfg.seed_base + ep;
    Arena arena(ec);
    StepResult obs = arena.Reset(res.seed);
    agent.BeginEpisode(res.seed);
    while (!obs.done) {
      const auto t0 = Clock::now();
      Decision d;
      try {
        d = agent.Decide({&obs.ascii, &obs.depth, &arena.state()});
      } catch (const Error& e) {
        d = Decision{};
        d.error = std::string(ErrorKindName(e.kind()));
      } catch (const std::exception&) {
        d = Decision{};
        d.error = "Internal";
      }
      if (d.error) {
        ++res.errors[*d.error];
        if (d.buttons.empty()) d.buttons = {Action::kTurnLeft};
      }
      if (d.buttons.empty()) d.buttons = {Action::kTurnLeft};
      res.parse_misses += d.parse_miss;
      res.latencies_ms.push_back(d.latency_ms);
      ++res.histogram[d.buttons.ToString()];
      res.composite += d.buttons.size() >= 2;
      res.actions.push_back(d.buttons);

      obs = arena.Step(d.buttons);
      ++res.survival_steps;
      if (obs.reward > 0) res.frags += obs.reward;
      if (trace.is_open()) {
        nlohmann::json line = {{"episode", ep},          {"seed", res.seed},
                               {"step", res.survival_steps}, {"tic", obs.tic},
                               {"buttons", d.buttons.ToString()}, {"reward", obs.reward},
                               {"latency_ms", d.latency_ms}, {"parse_miss", d.parse_miss}};
        if (d.probs) line["probs"] = *d.probs;
        if (d.error) line["error"] = *d.error;
        trace << line.dump() << '\n';
      }
      if (cfg.realtime) std::this_thread::sleep_until(t0 + tic_period * cfg.frame_skip);
    }
    res.died = arena.state().health <= 0;
    res.kill_events = static_cast<int>(arena.state().kills.size());
    out.push_back(std::move(res));
  }
  return out;
}

nlohmann::json BenchReport::ToJson(bool include_timing) const {
  nlohmann::json j = {{"agent", agent},
                      {"params", params},
                      {"episodes", episodes},
                      {"frame_skip", frame_skip},
                      {"seed_base", seed_base},
                      {"avg_survival", avg_survival},
                      {"max_survival", max_survival},
                      {"total_frags", total_frags},
                      {"total_decisions", total_decisions},
                      {"composite_rate", composite_rate},
                      {"parse_misses", parse_misses},
                      {"errors", errors},
                      {"histogram", histogram}};
  if (include_timing) j["mean_latency_ms"] = mean_latency_ms;
  return j;
}

BenchReport Summarize(const std::string& agent, const std::string& params,
                      const std::vector<EpisodeResult>& results, const BenchConfig& cfg) {
  if (results.empty()) Fail(ErrorKind::kEmptyResults, "no episodes to summarize");
  BenchReport r;
  r.agent = agent;
  r.params = params;
  r.episodes = static_cast<int>(results.size());
  r.frame_skip = cfg.frame_skip;
  r.seed_base = cfg.seed_base;
  int64_t steps = 0, composite = 0;
  double latency = 0;
  for (const EpisodeResult& e : results) {
    steps += e.survival_steps;
    r.max_survival = std::max(r.max_survival, e.survival_steps);
    r.total_frags += e.frags;
    composite += e.composite;
    r.parse_misses += e.parse_misses;
    for (double l : e.latencies_ms) latency += l;
    for (const auto& [k, v] : e.errors) r.errors[k] += v;
    for (const auto& [k, v] : e.histogram) r.histogram[k] += v;
  }
  r.total_decisions = steps;
  r.avg_survival = static_cast<double>(steps) / r.episodes;
  r.mean_latency_ms = steps > 0 ? latency / steps : 0;
  r.composite_rate = steps > 0 ? static_cast<double>(composite) / steps : 0;
  return r;
}

std::string FormatTable(const std::vector<BenchReport>& reports) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-16s %12s %5s %10s %10s %7s %10s %7s\n", "Agent", "Params",
                "Ep.", "Avg Surv.", "Max Surv.", "Frags", "Lat.", "Comp.");
  out << line;
  for (const BenchReport& r : reports) {
    char lat[32];
    if (r.mean_latency_ms >= 1000) {
      std::snprintf(lat, sizeof(lat), "%.1fs", r.mean_latency_ms / 1000);
    } else {
      std::snprintf(lat, sizeof(lat), "%.0fms", r.mean_latency_ms);
    }
    std::snprintf(line, sizeof(line), "%-16s %12s %5d %10.1f %10d %7lld %10s %6.0f%%\n",
                  r.agent.c_str(), r.params.c_str(), r.episodes, r.avg_survival, r.max_survival,
                  static_cast<long long>(r.total_frags), lat, 100 * r.composite_rate);
    out << line;
  }
  return out.str();
}

nlohmann::json LatencyStats::ToJson() const {
  return {{"samples", samples}, {"p50_ms", p50_ms}, {"p95_ms", p95_ms},
          {"max_ms", max_ms},   {"mean_ms", mean_ms}};
}

LatencyStats ComputeLatencyStats(std::vector<double> samples) {
  if (samples.empty()) Fail(ErrorKind::kEmptyResults, "no latency samples");
  std::sort(samples.begin(), samples.end());
  auto rank = [&](double q) {
    const size_t idx = static_cast<size_t>(std::ceil(q * samples.size()));
    return samples[std::clamp<size_t>(idx, 1, samples.size()) - 1];
  };
  LatencyStats s;
  s.samples = static_cast<int>(samples.size());
  s.p50_ms = rank(0.50);
  s.p95_ms = rank(0.95);
  s.max_ms = samples.back();
  double sum = 0;
  for (double v : samples) sum += v;
  s.mean_ms = sum / samples.size();
  return s;
}

std::pair<AsciiFrame, DepthGrid> RandomFrame(std::mt19937_64& rng) {
  AsciiFrame f;
  DepthGrid g;
  for (int r = 0; r < kFrameRows; ++r) {
    for (int c = 0; c < kFrameCols; ++c) {
      f.set(r, c, kPalette[rng() % kPalette.size()]);
      g.at(r, c) = static_cast<uint8_t>(rng() % kNumDepthBins);
    }
  }
  return {f, g};
}

LatencyStats LatencyBench(const DoomEncoder& model, int n, uint64_t seed, const PolicyConfig& policy) {
  if (n < 1) Fail(ErrorKind::kInvalidArgument, "latency bench needs n >= 1");
  std::mt19937_64 rng(seed);
  std::vector<std::pair<AsciiFrame, DepthGrid>> frames;
  for (int i = 0; i < n; ++i) frames.push_back(RandomFrame(rng));
  // One untimed pass so first-touch allocation is not measured.
  SelectButtons(model.Forward(frames[0].first, frames[0].second), policy);
  std::vector<double> samples;
  for (const auto& [f, d] : frames) {
    const auto t0 = Clock::now();
    const ButtonSet b = SelectButtons(model.Forward(f, d), policy);
    samples.push_back(Ms(Clock::now() - t0));
    if (b.empty()) Fail(ErrorKind::kInvalidArgument, "policy returned no buttons");
  }
  return ComputeLatencyStats(std::move(samples));
}

}  // namespace microdoom

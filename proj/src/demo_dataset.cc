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

#include "microdoom/demo_dataset.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include "microdoom/error.h"

namespace microdoom {
namespace {

// Shortest decimal that reads back as the same float, so files show 0.85
// rather than 0.8500000238418579.
double FloatForJson(float v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  double d = 0;
  std::from_chars(buf, res.ptr, d);
  return d;
}

}  // namespace

std::array<float, 4> SoftScores(ButtonSet buttons) {
  if (buttons.empty()) Fail(ErrorKind::kEmptyButtons, "no buttons held");
  std::array<float, 4> s;
  for (Action a : kAllActions) s[ActionIndex(a)] = buttons.contains(a) ? kHighScore : kLowScore;
  return s;
}

int HardLabel(const std::array<float, 4>& scores) {
  int best = 0;
  for (int i = 1; i < 4; ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

DemoRecord DemoRecord::FromFrame(const AsciiFrame& frame, const DepthGrid& depth,
                                 const std::array<float, 4>& scores, DemoMeta meta) {
  DemoRecord r;
  r.ascii = frame.Serialize();
  r.depth_bins = depth.bins;
  r.soft_scores = scores;
  r.meta = std::move(meta);
  return r;
}

AsciiFrame DemoRecord::Frame() const { return AsciiFrame::Parse(ascii); }

DepthGrid DemoRecord::Depth() const {
  DepthGrid g;
  g.bins = depth_bins;
  return g;
}

nlohmann::json RecordToJson(const DemoRecord& r) {
  nlohmann::json scores = nlohmann::json::array();
  for (float s : r.soft_scores) scores.push_back(FloatForJson(s));
  nlohmann::json bins = nlohmann::json::array();
  for (uint8_t b : r.depth_bins) bins.push_back(int{b});
  return {{"ascii", r.ascii},
          {"depth_bins", bins},
          {"soft_scores", scores},
          {"meta", {{"episode", r.meta.episode}, {"tic", r.meta.tic}, {"source", r.meta.source}}}};
}

DemoRecord RecordFromJson(const nlohmann::json& j) {
  static const std::set<std::string> kKeys = {"ascii", "depth_bins", "soft_scores", "meta"};
  if (!j.is_object()) Fail(ErrorKind::kSchema, "record is not an object");
  for (const auto& [key, _] : j.items()) {
    if (!kKeys.count(key)) Fail(ErrorKind::kSchema, "unexpected field '" + key + "'");
  }
  for (const auto& key : kKeys) {
    if (!j.contains(key)) Fail(ErrorKind::kSchema, "missing field '" + key + "'");
  }
  DemoRecord r;
  const auto& ascii = j["ascii"];
  if (!ascii.is_string()) Fail(ErrorKind::kSchema, "ascii must be a string");
  r.ascii = ascii.get<std::string>();
  try {
    AsciiFrame::Parse(r.ascii);
  } catch (const Error& e) {
    Fail(ErrorKind::kSchema, std::string("ascii: ") + e.what());
  }

  const auto& bins = j["depth_bins"];
  if (!bins.is_array() || bins.size() != static_cast<size_t>(kFrameCells)) {
    Fail(ErrorKind::kSchema, "depth_bins must hold " + std::to_string(kFrameCells) +
                                 " values, got " + std::to_string(bins.is_array() ? bins.size() : 0));
  }
  for (int i = 0; i < kFrameCells; ++i) {
    if (!bins[i].is_number_integer() || bins[i].get<int>() < 0 ||
        bins[i].get<int>() >= kNumDepthBins) {
      Fail(ErrorKind::kSchema, "depth bin " + std::to_string(i) + " outside [0, 15]");
    }
    r.depth_bins[i] = static_cast<uint8_t>(bins[i].get<int>());
  }

  const auto& scores = j["soft_scores"];
  if (!scores.is_array() || scores.size() != 4) Fail(ErrorKind::kSchema, "soft_scores must hold 4 values");
  for (int i = 0; i < 4; ++i) {
    if (!scores[i].is_number()) Fail(ErrorKind::kSchema, "soft score is not a number");
    const double v = scores[i].get<double>();
    if (!std::isfinite(v) || v < 0 || v > 1) Fail(ErrorKind::kSchema, "soft score outside [0, 1]");
    r.soft_scores[i] = static_cast<float>(v);
  }

  const auto& meta = j["meta"];
  if (!meta.is_object() || !meta.contains("episode") || !meta.contains("tic") ||
      !meta.contains("source") || meta.size() != 3) {
    Fail(ErrorKind::kSchema, "meta must hold exactly episode, tic, source");
  }
  if (!meta["episode"].is_number_integer() || !meta["tic"].is_number_integer() ||
      !meta["source"].is_string()) {
    Fail(ErrorKind::kSchema, "meta field has the wrong type");
  }
  r.meta.episode = meta["episode"].get<int64_t>();
  r.meta.tic = meta["tic"].get<int64_t>();
  r.meta.source = meta["source"].get<std::string>();
  if (r.meta.source != "human" && r.meta.source != "expert") {
    Fail(ErrorKind::kSchema, "meta.source must be human or expert");
  }
  return r;
}

void WriteJsonl(const std::vector<DemoRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) Fail(ErrorKind::kIo, "cannot open " + path + " for writing");
  for (const DemoRecord& r : records) out << RecordToJson(r).dump() << '\n';
  out.flush();
  if (!out) Fail(ErrorKind::kIo, "write failed: " + path);
}

std::vector<DemoRecord> ReadJsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kIo, "cannot open " + path);
  std::vector<DemoRecord> out;
  std::string line;
  int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(RecordFromJson(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      Fail(ErrorKind::kSchema, path + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      Fail(ErrorKind::kSchema, path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (in.bad()) Fail(ErrorKind::kIo, "read failed: " + path);
  return out;
}

std::vector<size_t> SeededPermutation(size_t n, uint64_t seed) {
  std::vector<size_t> idx(n);
  for (size_t i = 0; i < n; ++i) idx[i] = i;
  std::mt19937_64 rng(seed);
  for (size_t i = n; i > 1; --i) {
    // Rejection sampling keeps the draw unbiased and library-independent.
    const uint64_t bound = i;
    const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    uint64_t x;
    do {
      x = rng();
    } while (x >= limit);
    std::swap(idx[i - 1], idx[x % bound]);
  }
  return idx;
}

DatasetSplit Split(std::vector<DemoRecord> records, uint64_t seed, double val_fraction) {
  const size_t n = records.size();
  if (n < 10) Fail(ErrorKind::kTooFewRecords, std::to_string(n) + " records; need at least 10");
  if (!(val_fraction >= 0 && val_fraction < 1)) {
    Fail(ErrorKind::kInvalidArgument, "val_fraction must be in [0, 1)");
  }
  const size_t n_val = static_cast<size_t>(std::llround(val_fraction * n));
  DatasetSplit split;
  split.seed = seed;
  const std::vector<size_t> order = SeededPermutation(n, seed);
  for (size_t i = 0; i < n; ++i) {
    (i < n_val ? split.val : split.train).push_back(std::move(records[order[i]]));
  }
  return split;
}

std::vector<DemoRecord> GenerateExpertDemos(int episodes, uint64_t seed, const EpisodeConfig& config) {
  if (episodes < 1) Fail(ErrorKind::kInvalidArgument, "episodes must be positive");
  std::vector<DemoRecord> out;
  Arena arena(config);
  for (int e = 0; e < episodes; ++e) {
    StepResult r = arena.Reset(seed + static_cast<uint64_t>(e));
    while (!r.done) {
      const ExpertDecision d = ScriptedExpert(arena.state());
      out.push_back(DemoRecord::FromFrame(r.ascii, r.depth, SoftScores(d.buttons), DemoMeta{e, r.tic, "expert"}));
      r = arena.Step(d.buttons);
    }
  }
  return out;
}

}  // namespace microdoom

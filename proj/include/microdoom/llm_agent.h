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

#ifndef MICRODOOM_LLM_AGENT_H_
#define MICRODOOM_LLM_AGENT_H_

// Chat-completion agent: one stateless request per frame carrying the
// fixed system prompt and the current ASCII view plus depth digits.

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "microdoom/actions.h"
#include "microdoom/bench.h"
#include "microdoom/error.h"
#include "microdoom/frame_codec.h"

namespace microdoom {

enum class LlmMode { kReasoning, kStandard };

struct LlmAgentConfig {
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string model;
  std::string api_key_env = "OPENAI_API_KEY";
  LlmMode mode = LlmMode::kReasoning;
  std::optional<double> temperature;  // unset: provider default
  std::optional<double> top_p;
  int max_completion_tokens = 4000;
  // Request field carrying the token budget.
  std::string max_tokens_field = "max_completion_tokens";
  double timeout_s = 60;
  int retries = 0;
  std::string transcript_path;  // JSONL of every exchange, empty to skip

  // Reasoning: temperature 0.6, top_p 0.95, 4,000 tokens.
  // Standard: provider-default temperature, 200 tokens.
  static LlmAgentConfig Defaults(LlmMode mode);
};

std::string BuildSystemPrompt();
std::string BuildUserMessage(const AsciiFrame& ascii, const DigitGrid& digits);
nlohmann::json BuildRequestBody(const LlmAgentConfig& cfg, const AsciiFrame& ascii,
                                const DigitGrid& digits);

struct ParsedAction {
  ButtonSet buttons;
  bool parse_miss = false;
};

// Total: never empty, never both rotations. Misses fall back to {turn_left}.
ParsedAction ParseAction(std::string_view text);

struct AgentDecision {
  ButtonSet buttons;
  std::string raw;
  double latency_ms = 0;
  bool parse_miss = false;
  std::optional<ErrorKind> error;  // kTimeout, kHttp or kAuth
};

class LlmClient {
 public:
  explicit LlmClient(LlmAgentConfig cfg);
  ~LlmClient();

  // Never throws for transport or protocol failures; those come back as
  // fallback buttons with `error` set and are tallied.
  AgentDecision Decide(const AsciiFrame& ascii, const DigitGrid& digits);

  const LlmAgentConfig& config() const { return cfg_; }
  std::map<std::string, int64_t> tallies() const;

 private:
  struct Impl;
  LlmAgentConfig cfg_;
  std::unique_ptr<Impl> impl_;
  mutable std::mutex mu_;
  std::map<std::string, int64_t> tallies_;
  int64_t requests_ = 0;
};

class LlmBenchAgent : public Agent {
 public:
  explicit LlmBenchAgent(LlmAgentConfig cfg) : client_(std::move(cfg)) {}
  std::string name() const override { return client_.config().model; }
  std::string params() const override { return "proprietary"; }
  bool deterministic() const override { return false; }
  Decision Decide(const Observation& obs) override;
  LlmClient& client() { return client_; }

 private:
  LlmClient client_;
};

}  // namespace microdoom

#endif  // MICRODOOM_LLM_AGENT_H_

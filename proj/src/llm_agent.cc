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

#include "microdoom/llm_agent.h"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>
#include <vector>

#include "httplib.h"

namespace microdoom {
namespace {

using Clock = std::chrono::steady_clock;

constexpr std::string_view kSystemPrompt =
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

std::string Trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

struct Endpoint {
  std::string scheme_host_port;
  std::string path;
};

Endpoint SplitUrl(const std::string& url) {
  const size_t scheme = url.find("://");
  if (scheme == std::string::npos) Fail(ErrorKind::kInvalidArgument, "endpoint needs a scheme: " + url);
  const size_t slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

}  // namespace

LlmAgentConfig LlmAgentConfig::Defaults(LlmMode mode) {
  LlmAgentConfig c;
  c.mode = mode;
  if (mode == LlmMode::kReasoning) {
    c.temperature = 0.6;
    c.top_p = 0.95;
    c.max_completion_tokens = 4000;
  } else {
    c.temperature.reset();
    c.top_p.reset();
    c.max_completion_tokens = 200;
  }
  return c;
}

std::string BuildSystemPrompt() { return std::string(kSystemPrompt); }

std::string BuildUserMessage(const AsciiFrame& ascii, const DigitGrid& digits) {
  std::string out = "View:\n```\n";
  out += ascii.Serialize();
  out += "\n```\n\nDepth (0=near, 9=far):\n```\n";
  out += SerializeDigitGrid(digits);
  out += "\n```";
  return out;
}

nlohmann::json BuildRequestBody(const LlmAgentConfig& cfg, const AsciiFrame& ascii,
                                const DigitGrid& digits) {
  nlohmann::json body = {
      {"model", cfg.model},
      {"messages",
       {{{"role", "system"}, {"content", BuildSystemPrompt()}},
        {{"role", "user"}, {"content", BuildUserMessage(ascii, digits)}}}},
  };
  body[cfg.max_tokens_field] = cfg.max_completion_tokens;
  if (cfg.temperature) body["temperature"] = *cfg.temperature;
  if (cfg.top_p) body["top_p"] = *cfg.top_p;
  return body;
}

ParsedAction ParseAction(std::string_view text) {
  static const std::regex kLine(
      "^(shoot|move_forward|turn_left|turn_right)(?:\\s*\\+\\s*(shoot|move_forward|turn_left|turn_right))?$");
  std::string cleaned;
  cleaned.reserve(text.size());
  for (char ch : text) {
    if (ch == '`' || ch == '*' || ch == '"' || ch == '\'') continue;
    cleaned += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  }
  std::optional<ParsedAction> last;
  std::istringstream lines(cleaned);
  std::string line;
  while (std::getline(lines, line)) {
    line = Trim(line);
    while (!line.empty() && line.back() == '.') line.pop_back();
    line = Trim(line);
    std::smatch m;
    if (!std::regex_match(line, m, kLine)) continue;
    ParsedAction p;
    const Action first = *ActionFromName(m[1].str());
    p.buttons.insert(first);
    if (m[2].matched) {
      const Action second = *ActionFromName(m[2].str());
      p.buttons.insert(second);
      // Contradictory rotations: the first named wins.
      if (p.buttons.contradictory()) p.buttons.erase(second);
    }
    last = p;
  }
  if (last) return *last;
  return {ButtonSet{Action::kTurnLeft}, true};
}

struct LlmClient::Impl {
  std::unique_ptr<httplib::Client> http;
  std::string path;
  std::ofstream transcript;
};

LlmClient::LlmClient(LlmAgentConfig cfg) : cfg_(std::move(cfg)), impl_(std::make_unique<Impl>()) {
  const Endpoint ep = SplitUrl(cfg_.endpoint);
  impl_->http = std::make_unique<httplib::Client>(ep.scheme_host_port);
  impl_->path = ep.path;
  const auto secs = static_cast<time_t>(cfg_.timeout_s);
  const auto usecs = static_cast<time_t>((cfg_.timeout_s - secs) * 1e6);
  impl_->http->set_connection_timeout(secs, usecs);
  impl_->http->set_read_timeout(secs, usecs);
  impl_->http->set_write_timeout(secs, usecs);
  if (const char* key = std::getenv(cfg_.api_key_env.c_str()); key != nullptr && *key != '\0') {
    impl_->http->set_bearer_token_auth(key);
  }
  if (!cfg_.transcript_path.empty()) {
    impl_->transcript.open(cfg_.transcript_path, std::ios::app);
    if (!impl_->transcript) Fail(ErrorKind::kIo, "cannot open " + cfg_.transcript_path);
  }
}

LlmClient::~LlmClient() = default;

std::map<std::string, int64_t> LlmClient::tallies() const {
  std::lock_guard<std::mutex> lock(mu_);
  return tallies_;
}

AgentDecision LlmClient::Decide(const AsciiFrame& ascii, const DigitGrid& digits) {
  std::lock_guard<std::mutex> lock(mu_);
  const auto t0 = Clock::now();
  const std::string body = BuildRequestBody(cfg_, ascii, digits).dump();
  AgentDecision d;
  int status = 0;
  for (int attempt = 0; attempt <= cfg_.retries; ++attempt) {
    d.error.reset();
    const auto sent = Clock::now();
    httplib::Result res = impl_->http->Post(impl_->path, body, "application/json");
    const double waited = std::chrono::duration<double>(Clock::now() - sent).count();
    if (!res) {
      const bool timed_out = res.error() == httplib::Error::ConnectionTimeout ||
                             (res.error() == httplib::Error::Read && waited >= 0.9 * cfg_.timeout_s);
      d.error = timed_out ? ErrorKind::kTimeout : ErrorKind::kHttp;
      d.raw = httplib::to_string(res.error());
      continue;
    }
    status = res->status;
    if (status == 401 || status == 403) {
      d.error = ErrorKind::kAuth;
      d.raw = res->body;
      break;  // retrying will not fix credentials
    }
    if (status < 200 || status >= 300) {
      d.error = ErrorKind::kHttp;
      d.raw = res->body;
      continue;
    }
    try {
      const nlohmann::json j = nlohmann::json::parse(res->body);
      const auto& content = j.at("choices").at(0).at("message").at("content");
      d.raw = content.is_string() ? content.get<std::string>() : std::string();
    } catch (const nlohmann::json::exception&) {
      d.error = ErrorKind::kHttp;
      d.raw = res->body;
      continue;
    }
    break;
  }

  if (d.error) {
    d.buttons = {Action::kTurnLeft};
    ++tallies_[std::string(ErrorKindName(*d.error))];
  } else {
    const ParsedAction p = ParseAction(d.raw);
    d.buttons = p.buttons;
    d.parse_miss = p.parse_miss;
    if (p.parse_miss) ++tallies_["ParseMiss"];
  }
  ++tallies_["requests"];
  d.latency_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();

  if (impl_->transcript.is_open()) {
    nlohmann::json line = {{"index", requests_},
                           {"request", nlohmann::json::parse(body)},
                           {"status", status},
                           {"response", d.raw},
                           {"buttons", d.buttons.ToString()},
                           {"parse_miss", d.parse_miss},
                           {"latency_ms", d.latency_ms}};
    if (d.error) line["error"] = std::string(ErrorKindName(*d.error));
    impl_->transcript << line.dump() << '\n';
    impl_->transcript.flush();
  }
  ++requests_;
  return d;
}

Decision LlmBenchAgent::Decide(const Observation& obs) {
  const AgentDecision a = client_.Decide(*obs.ascii, DepthToDigitGrid(*obs.depth));
  Decision d;
  d.buttons = a.buttons;
  d.latency_ms = a.latency_ms;
  d.parse_miss = a.parse_miss;
  if (a.error) d.error = std::string(ErrorKindName(*a.error));
  return d;
}

}  // namespace microdoom

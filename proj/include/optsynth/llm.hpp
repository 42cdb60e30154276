// Copyright 2026 The optsynth Authors
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

// Language-model access: prompt templates, backends (live HTTP, replay from
// fixtures, scripted), rate limiting and exchange recording.

#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "optsynth/errors.hpp"

namespace optsynth {

enum class PromptId {
  kInitialGeneration,
  kSelfCriticism,
  kSelfRefinement,
  kAutoformulation,
  kAugmentation,
  kInitConfig,
  kRefineConfig,
  kFormatRepair,
};

std::string_view to_string(PromptId id);
std::optional<PromptId> parse_prompt_id(std::string_view s);
const std::vector<PromptId>& all_prompt_ids();

// Placeholders are written {{name}} (required) or {{name?}} (optional).
// Asset lines starting with "##!" are metadata and not part of the body.
struct PromptTemplate {
  PromptId id = PromptId::kInitialGeneration;
  std::string version;
  std::string body;
  std::vector<std::string> required;
  std::vector<std::string> optional;
  std::vector<std::string> notes;
};

class RenderError : public Error {
 public:
  RenderError(const std::string& message, std::string placeholder)
      : Error(message), placeholder_(std::move(placeholder)) {}
  const std::string& placeholder() const { return placeholder_; }

 private:
  std::string placeholder_;
};

PromptTemplate parse_prompt_asset(PromptId id, std::string_view text);
const PromptTemplate& prompt_template(PromptId id);

using Bindings = std::map<std::string, std::string>;

// Throws RenderError naming the first unbound required placeholder. Unbound
// optional placeholders render empty; extra bindings are ignored.
std::string render(const PromptTemplate& t, const Bindings& bindings);
std::string render(PromptId id, const Bindings& bindings);

// The fifteen instruction variants for the formulation prompt.
const std::vector<std::string>& autoformulation_instructions();

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

// Fixture key: hash of the prompt, plus the sample index when nonzero.
std::string replay_key(std::string_view prompt, int sample);

struct ChatRequest {
  PromptId template_id = PromptId::kInitialGeneration;
  std::string prompt;
  int sample = 0;
  std::optional<double> temperature;
};

struct ChatExchange {
  std::string key;
  std::string template_id;
  std::string prompt;
  std::string response;
  double latency = 0.0;
  std::string backend;
  int sample = 0;
  int retries = 0;
  std::optional<std::int64_t> prompt_tokens;
  std::optional<std::int64_t> completion_tokens;

  nlohmann::json to_json() const;
  static ChatExchange from_json(const nlohmann::json& j);
};

class FixtureMissingError : public GatewayError {
 public:
  explicit FixtureMissingError(std::string key)
      : GatewayError("no replay fixture for prompt hash " + key), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

// One JSON document per exchange, named <key>.json. Concurrent readers,
// writes serialized and atomic (temp file + rename).
class FixtureStore {
 public:
  explicit FixtureStore(std::filesystem::path dir);

  std::optional<ChatExchange> find(const std::string& key) const;
  void put(const ChatExchange& exchange);
  std::vector<std::string> keys() const;
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  mutable std::mutex write_mutex_;
};

class Clock {
 public:
  virtual ~Clock() = default;
  virtual double now() = 0;  // seconds
  virtual void sleep_for(double seconds) = 0;
};

Clock& system_clock();

// Time moves only through sleep_for() and advance().
class VirtualClock : public Clock {
 public:
  double now() override;
  void sleep_for(double seconds) override;
  void advance(double seconds) { sleep_for(seconds); }

 private:
  std::mutex mutex_;
  double now_ = 0.0;
};

// At most `per_minute` acquisitions in any 60-second window; <= 0 disables.
class RateLimiter {
 public:
  RateLimiter(int per_minute, Clock& clock) : per_minute_(per_minute), clock_(clock) {}
  void acquire();

 private:
  int per_minute_;
  Clock& clock_;
  std::mutex mutex_;
  std::deque<double> stamps_;
};

enum class BackendKind { kLive, kReplay };

std::string_view to_string(BackendKind kind);
std::optional<BackendKind> parse_backend_kind(std::string_view s);

struct BackendConfig {
  BackendKind kind = BackendKind::kReplay;
  std::string endpoint;  // scheme://host[:port]
  std::string path = "/v1/chat/completions";
  std::string model;
  double temperature = 0.8;
  int max_retries = 3;
  double backoff_initial = 1.0;  // seconds, doubled per retry
  int requests_per_minute = 60;
  double request_timeout = 120.0;
  std::string api_key_env = "OPTSYNTH_API_KEY";
  std::filesystem::path fixture_dir;

  // Throws ConfigError: replay without fixture_dir, live without endpoint
  // or model, negative retries or timeouts.
  void check() const;
};

// Temperature used when a request does not set one: 0 for formulation
// passes, `fallback` otherwise.
double default_temperature(PromptId id, double fallback);

class Backend {
 public:
  virtual ~Backend() = default;
  virtual ChatExchange complete(const ChatRequest& request) = 0;
  virtual std::string id() const = 0;
};

class ReplayBackend : public Backend {
 public:
  explicit ReplayBackend(std::filesystem::path fixture_dir) : store_(std::move(fixture_dir)) {}
  ChatExchange complete(const ChatRequest& request) override;
  std::string id() const override { return "replay"; }

 private:
  FixtureStore store_;
};

// Chat-completion requests over HTTP(S) with bounded retries and
// exponential backoff on transport errors, 429 and 5xx.
class LiveBackend : public Backend {
 public:
  LiveBackend(BackendConfig config, Clock& clock = system_clock());
  ChatExchange complete(const ChatRequest& request) override;
  std::string id() const override { return "live:" + config_.model; }

 private:
  BackendConfig config_;
  Clock& clock_;
  RateLimiter limiter_;
};

class ScriptedBackend : public Backend {
 public:
  using Script = std::function<std::string(const ChatRequest&)>;
  explicit ScriptedBackend(Script script) : script_(std::move(script)) {}
  ChatExchange complete(const ChatRequest& request) override;
  std::string id() const override { return "scripted"; }

 private:
  Script script_;
};

std::shared_ptr<Backend> make_backend(const BackendConfig& config);

struct GatewayOptions {
  int max_in_flight = 4;
  double default_temperature = 0.8;
  // When set, every exchange is stored here as a fixture before it is
  // returned, so the run can be replayed from this directory.
  std::optional<std::filesystem::path> record_dir;
};

class Gateway {
 public:
  explicit Gateway(std::shared_ptr<Backend> backend, GatewayOptions options = {});

  ChatExchange complete(const ChatRequest& request);
  ChatExchange ask(PromptId id, const Bindings& bindings, int sample = 0);

  std::string backend_id() const { return backend_->id(); }

 private:
  std::shared_ptr<Backend> backend_;
  GatewayOptions options_;
  std::optional<FixtureStore> recorder_;
  std::mutex slot_mutex_;
  std::condition_variable slot_cv_;
  int in_flight_ = 0;
};

}  // namespace optsynth

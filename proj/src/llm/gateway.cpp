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

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "optsynth/llm.hpp"

namespace optsynth {

namespace {

class SystemClock : public Clock {
 public:
  double now() override {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
  }
  void sleep_for(double seconds) override {
    if (seconds > 0) std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
  }
};

std::optional<std::int64_t> optional_int(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number_integer()) return std::nullopt;
  return it->get<std::int64_t>();
}

bool retryable(int status) { return status == 429 || status >= 500; }

}  // namespace

// ---- exchanges and fixtures -----------------------------------------------

nlohmann::json ChatExchange::to_json() const {
  nlohmann::json j = {{"key", key},           {"template_id", template_id}, {"prompt", prompt},
                      {"response", response}, {"latency", latency},         {"backend", backend},
                      {"sample", sample},     {"retries", retries}};
  if (prompt_tokens) j["prompt_tokens"] = *prompt_tokens;
  if (completion_tokens) j["completion_tokens"] = *completion_tokens;
  return j;
}

ChatExchange ChatExchange::from_json(const nlohmann::json& j) {
  ChatExchange e;
  try {
    e.key = j.at("key").get<std::string>();
    e.template_id = j.value("template_id", "");
    e.prompt = j.value("prompt", "");
    e.response = j.at("response").get<std::string>();
    e.latency = j.value("latency", 0.0);
    e.backend = j.value("backend", "");
    e.sample = j.value("sample", 0);
    e.retries = j.value("retries", 0);
    e.prompt_tokens = optional_int(j, "prompt_tokens");
    e.completion_tokens = optional_int(j, "completion_tokens");
  } catch (const nlohmann::json::exception& ex) {
    throw GatewayError(std::string("malformed exchange record: ") + ex.what());
  }
  return e;
}

FixtureStore::FixtureStore(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::optional<ChatExchange> FixtureStore::find(const std::string& key) const {
  const auto path = dir_ / (key + ".json");
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& ex) {
    throw GatewayError("fixture " + path.string() + " is not valid JSON: " + ex.what());
  }
  return ChatExchange::from_json(j);
}

void FixtureStore::put(const ChatExchange& exchange) {
  std::lock_guard lock(write_mutex_);
  std::filesystem::create_directories(dir_);
  const auto path = dir_ / (exchange.key + ".json");
  const auto tmp = dir_ / (exchange.key + ".json.tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw GatewayError("cannot write fixture " + tmp.string());
    out << exchange.to_json().dump(2) << '\n';
    if (!out) throw GatewayError("cannot write fixture " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::vector<std::string> FixtureStore::keys() const {
  std::vector<std::string> out;
  if (!std::filesystem::is_directory(dir_)) return out;
  for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
    if (entry.path().extension() == ".json") out.push_back(entry.path().stem().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---- clocks and rate limiting ---------------------------------------------

Clock& system_clock() {
  static SystemClock clock;
  return clock;
}

double VirtualClock::now() {
  std::lock_guard lock(mutex_);
  return now_;
}

void VirtualClock::sleep_for(double seconds) {
  std::lock_guard lock(mutex_);
  if (seconds > 0) now_ += seconds;
}

void RateLimiter::acquire() {
  if (per_minute_ <= 0) return;
  std::unique_lock lock(mutex_);
  for (;;) {
    const double t = clock_.now();
    while (!stamps_.empty() && stamps_.front() <= t - 60.0) stamps_.pop_front();
    if (static_cast<int>(stamps_.size()) < per_minute_) {
      stamps_.push_back(t);
      return;
    }
    const double wait = stamps_.front() + 60.0 - t;
    lock.unlock();
    clock_.sleep_for(wait);
    lock.lock();
  }
}

// ---- configuration --------------------------------------------------------

std::string_view to_string(BackendKind kind) { return kind == BackendKind::kLive ? "live" : "replay"; }

std::optional<BackendKind> parse_backend_kind(std::string_view s) {
  if (s == "live") return BackendKind::kLive;
  if (s == "replay") return BackendKind::kReplay;
  return std::nullopt;
}

void BackendConfig::check() const {
  if (kind == BackendKind::kReplay && fixture_dir.empty()) {
    throw ConfigError("replay backend needs a fixture directory");
  }
  if (kind == BackendKind::kLive) {
    if (endpoint.empty()) throw ConfigError("live backend needs an endpoint");
    if (model.empty()) throw ConfigError("live backend needs a model name");
  }
  if (max_retries < 0) throw ConfigError("max_retries must be non-negative");
  if (!(backoff_initial >= 0)) throw ConfigError("backoff must be non-negative");
  if (!(request_timeout > 0)) throw ConfigError("request timeout must be positive");
  if (!(temperature >= 0)) throw ConfigError("temperature must be non-negative");
}

double default_temperature(PromptId id, double fallback) {
  return id == PromptId::kAutoformulation ? 0.0 : fallback;
}

// ---- backends -------------------------------------------------------------

ChatExchange ReplayBackend::complete(const ChatRequest& request) {
  const auto key = replay_key(request.prompt, request.sample);
  auto found = store_.find(key);
  if (!found) throw FixtureMissingError(key);
  ChatExchange e = std::move(*found);
  e.latency = 0.0;
  e.retries = 0;
  e.backend = id();
  e.prompt = request.prompt;
  e.sample = request.sample;
  e.template_id = std::string(to_string(request.template_id));
  return e;
}

ChatExchange ScriptedBackend::complete(const ChatRequest& request) {
  ChatExchange e;
  e.key = replay_key(request.prompt, request.sample);
  e.template_id = std::string(to_string(request.template_id));
  e.prompt = request.prompt;
  e.sample = request.sample;
  e.backend = id();
  e.response = script_(request);
  return e;
}

LiveBackend::LiveBackend(BackendConfig config, Clock& clock)
    : config_(std::move(config)), clock_(clock), limiter_(config_.requests_per_minute, clock) {
  config_.check();
  if (config_.kind != BackendKind::kLive) throw ConfigError("LiveBackend needs a live configuration");
}

ChatExchange LiveBackend::complete(const ChatRequest& request) {
  const double temperature = request.temperature.value_or(default_temperature(request.template_id, config_.temperature));
  nlohmann::json body = {{"model", config_.model},
                         {"temperature", temperature},
                         {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}})}};
  const std::string payload = body.dump();

  httplib::Headers headers;
  if (const char* key = std::getenv(config_.api_key_env.c_str()); key != nullptr && *key != '\0') {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  httplib::Client client(config_.endpoint);
  const auto timeout = std::chrono::duration<double>(config_.request_timeout);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));

  std::string last_error;
  double backoff = config_.backoff_initial;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      clock_.sleep_for(backoff);
      backoff *= 2.0;
    }
    limiter_.acquire();
    const double start = clock_.now();
    auto res = client.Post(config_.path, headers, payload, "application/json");
    const double latency = clock_.now() - start;
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP " + std::to_string(res->status);
      if (retryable(res->status)) continue;
      throw GatewayError("chat request failed: " + last_error + ": " + res->body.substr(0, 200));
    }
    nlohmann::json reply;
    try {
      reply = nlohmann::json::parse(res->body);
      ChatExchange e;
      e.key = replay_key(request.prompt, request.sample);
      e.template_id = std::string(to_string(request.template_id));
      e.prompt = request.prompt;
      e.response = reply.at("choices").at(0).at("message").at("content").get<std::string>();
      e.latency = latency;
      e.backend = id();
      e.sample = request.sample;
      e.retries = attempt;
      if (auto usage = reply.find("usage"); usage != reply.end() && usage->is_object()) {
        e.prompt_tokens = optional_int(*usage, "prompt_tokens");
        e.completion_tokens = optional_int(*usage, "completion_tokens");
      }
      return e;
    } catch (const nlohmann::json::exception& ex) {
      last_error = std::string("malformed reply: ") + ex.what();
    }
  }
  throw GatewayError("chat request failed after " + std::to_string(config_.max_retries + 1) +
                     " attempts: " + last_error);
}

std::shared_ptr<Backend> make_backend(const BackendConfig& config) {
  config.check();
  if (config.kind == BackendKind::kReplay) return std::make_shared<ReplayBackend>(config.fixture_dir);
  return std::make_shared<LiveBackend>(config);
}

// ---- gateway --------------------------------------------------------------

Gateway::Gateway(std::shared_ptr<Backend> backend, GatewayOptions options)
    : backend_(std::move(backend)), options_(std::move(options)) {
  if (!backend_) throw ConfigError("gateway needs a backend");
  if (options_.max_in_flight < 1) throw ConfigError("max_in_flight must be at least 1");
  if (options_.record_dir) recorder_.emplace(*options_.record_dir);
}

ChatExchange Gateway::complete(const ChatRequest& request) {
  {
    std::unique_lock lock(slot_mutex_);
    slot_cv_.wait(lock, [&] { return in_flight_ < options_.max_in_flight; });
    ++in_flight_;
  }
  struct Release {
    Gateway& g;
    ~Release() {
      {
        std::lock_guard lock(g.slot_mutex_);
        --g.in_flight_;
      }
      g.slot_cv_.notify_one();
    }
  } release{*this};

  ChatRequest req = request;
  if (!req.temperature) req.temperature = default_temperature(req.template_id, options_.default_temperature);
  ChatExchange e = backend_->complete(req);
  if (recorder_) recorder_->put(e);
  return e;
}

ChatExchange Gateway::ask(PromptId id, const Bindings& bindings, int sample) {
  ChatRequest req;
  req.template_id = id;
  req.prompt = render(id, bindings);
  req.sample = sample;
  return complete(req);
}

}  // namespace optsynth

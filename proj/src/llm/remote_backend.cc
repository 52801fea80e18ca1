// Copyright 2026 The btr Authors.
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

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include <cstdlib>

#include "btr/error.h"
#include "btr/llm/backends.h"

namespace btr::llm {
namespace {

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : std::string();
}

// RAII slot in the in-flight limiter.
class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<>& sem) : sem_(sem) { sem_.acquire(); }
  ~SlotGuard() { sem_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<>& sem_;
};

}  // namespace

RemoteConfig RemoteConfig::from_env() {
  RemoteConfig config;
  config.base_url = env_or_empty("BTR_LLM_BASE_URL");
  config.model = env_or_empty("BTR_LLM_MODEL");
  config.api_key = env_or_empty("BTR_LLM_API_KEY");
  if (config.base_url.empty() || config.model.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "remote backend needs BTR_LLM_BASE_URL and BTR_LLM_MODEL");
  }
  return config;
}

RemoteBackend::RemoteBackend(RemoteConfig config)
    : config_(std::move(config)), in_flight_(std::max(1, config_.max_in_flight)) {
  const auto scheme_end = config_.base_url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument,
                "base URL \"" + config_.base_url + "\" has no scheme");
  }
  const auto path_start = config_.base_url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    scheme_host_port_ = config_.base_url;
  } else {
    scheme_host_port_ = config_.base_url.substr(0, path_start);
    path_prefix_ = config_.base_url.substr(path_start);
  }
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

nlohmann::json RemoteBackend::request_body(const ModelRequest& request) const {
  nlohmann::json messages = nlohmann::json::array();
  if (!request.system_prompt.empty()) {
    messages.push_back({{"role", "system"}, {"content", request.system_prompt}});
  }
  for (const auto& m : request.messages) {
    messages.push_back({{"role", m.role}, {"content", m.content}});
  }
  return {{"model", request.model_name.empty() ? config_.model : request.model_name},
          {"messages", std::move(messages)},
          {"reasoning_effort", std::string(effort_name(request.effort))},
          {"response_format", {{"type", "json_object"}}}};
}

RawCompletion RemoteBackend::send(const ModelRequest& request) {
  SlotGuard slot(in_flight_);
  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(config_.timeout_seconds, 0);
  client.set_read_timeout(config_.timeout_seconds, 0);
  client.set_write_timeout(config_.timeout_seconds, 0);
  httplib::Headers headers;
  if (!config_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.api_key);
  }
  const auto result = client.Post(path_prefix_ + "/chat/completions", headers,
                                  request_body(request).dump(), "application/json");
  if (!result) {
    throw Error(ErrorCode::kNetwork, "chat completion request " + request.tag +
                                         " failed: " + httplib::to_string(result.error()));
  }
  if (result->status == 401 || result->status == 403) {
    throw Error(ErrorCode::kAuthentication,
                "chat completion rejected credentials (HTTP " +
                    std::to_string(result->status) + ")");
  }
  if (result->status < 200 || result->status >= 300) {
    throw Error(ErrorCode::kUpstream, "chat completion returned HTTP " +
                                          std::to_string(result->status) + ": " +
                                          result->body.substr(0, 512));
  }
  const auto body = nlohmann::json::parse(result->body, nullptr, false);
  if (body.is_discarded() || !body.contains("choices") || body["choices"].empty()) {
    throw Error(ErrorCode::kUpstream, "chat completion body has no choices");
  }
  RawCompletion out;
  const auto& message = body["choices"][0].value("message", nlohmann::json::object());
  out.text = message.value("content", std::string());
  if (body.contains("usage") && body["usage"].is_object()) {
    out.usage.prompt_tokens = body["usage"].value("prompt_tokens", std::int64_t{0});
    out.usage.completion_tokens = body["usage"].value("completion_tokens", std::int64_t{0});
  }
  return out;
}

}  // namespace btr::llm

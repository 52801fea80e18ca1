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

#ifndef BTR_LLM_BACKENDS_H_
#define BTR_LLM_BACKENDS_H_

#include <filesystem>
#include <map>
#include <memory>
#include <semaphore>
#include <string>
#include <vector>

#include "btr/llm/gateway.h"
#include "json.hpp"

namespace btr::llm {

struct ScriptEntry {
  std::string match_key;
  nlohmann::json response;
  // Informational; kept for error messages and round-tripping.
  std::string schema_id;
  std::string tag;
};

// Replays canned structured outputs keyed by match_key(schema, tag).
//
// Script file: JSON array of entries, each either
//   {"match_key": "<16 hex>", "response": {...}}  or
//   {"schema": "...", "tag": "...", "response": {...}}.
// A tag of "*" registers a fallback for every request on that schema.
// Bit-deterministic: the same request sequence always yields the same text.
class ScriptedBackend : public Backend {
 public:
  ScriptedBackend() = default;
  explicit ScriptedBackend(std::vector<ScriptEntry> entries);

  static std::shared_ptr<ScriptedBackend> from_json(const nlohmann::json& script);
  static std::shared_ptr<ScriptedBackend> from_file(const std::filesystem::path& path);

  // Throws Error(kInvalidArgument) on a duplicate key. Not thread-safe; build
  // the script before sharing the backend.
  void add(const std::string& schema_id, const std::string& tag,
           nlohmann::json response);
  void add(ScriptEntry entry);

  std::size_t size() const { return entries_.size(); }

  RawCompletion send(const ModelRequest& request) override;
  std::string name() const override { return "scripted"; }

  nlohmann::ordered_json to_json() const;

 private:
  std::map<std::string, ScriptEntry> entries_;
};

struct RemoteConfig {
  std::string base_url;  // e.g. "https://api.openai.com/v1"
  std::string model;
  std::string api_key;
  int max_in_flight = 4;
  int timeout_seconds = 120;

  // BTR_LLM_BASE_URL, BTR_LLM_MODEL, BTR_LLM_API_KEY. Throws
  // Error(kInvalidArgument) if base URL or model is unset.
  static RemoteConfig from_env();
};

// OpenAI-style chat-completion client: POST {base_url}/chat/completions.
class RemoteBackend : public Backend {
 public:
  explicit RemoteBackend(RemoteConfig config);

  RawCompletion send(const ModelRequest& request) override;
  std::string name() const override { return "remote"; }

  // Request body for one attempt; exposed for tests.
  nlohmann::json request_body(const ModelRequest& request) const;

 private:
  RemoteConfig config_;
  std::string scheme_host_port_;
  std::string path_prefix_;
  std::counting_semaphore<> in_flight_;
};

}  // namespace btr::llm

#endif  // BTR_LLM_BACKENDS_H_

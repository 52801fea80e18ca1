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

#ifndef BTR_LLM_GATEWAY_H_
#define BTR_LLM_GATEWAY_H_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "btr/llm/schema.h"
#include "json.hpp"

namespace btr::llm {

enum class ReasoningEffort { kLow, kMedium, kHigh };

std::string_view effort_name(ReasoningEffort effort);
ReasoningEffort parse_effort(std::string_view name);

struct Message {
  std::string role;  // "user" or "assistant"
  std::string content;

  bool operator==(const Message&) const = default;
};

// Extra caller-side check run after schema validation. Returns an error
// description to trigger a repair retry, or nullopt to accept.
using ResponseValidator =
    std::function<std::optional<std::string>(const nlohmann::json&)>;

struct ModelRequest {
  std::string system_prompt;
  std::vector<Message> messages;
  std::string schema_id;
  std::string model_name;  // empty: backend default
  ReasoningEffort effort = ReasoningEffort::kLow;
  // Stable caller-supplied label, e.g. "profile-7/judge/turn-3". Scripted
  // backends match on (schema_id, tag); prompt wording never participates.
  std::string tag;
  // Usage is aggregated per scope (one interview, one calibration case).
  std::string scope;
  ResponseValidator validator;
};

struct Usage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::int64_t calls = 0;

  Usage& operator+=(const Usage& other);
  bool operator==(const Usage&) const = default;
};

struct ModelResponse {
  std::string raw_text;
  nlohmann::json parsed;
  Usage usage;  // summed over repair attempts
  int attempts = 1;
};

// What a backend returns for one attempt: raw text plus token counts.
struct RawCompletion {
  std::string text;
  Usage usage;
};

class Backend {
 public:
  virtual ~Backend() = default;
  // One model call. Throws Error(kNetwork | kAuthentication | kUpstream |
  // kScriptMiss). Must be safe to call concurrently.
  virtual RawCompletion send(const ModelRequest& request) = 0;
  virtual std::string name() const = 0;
};

// FNV-1a 64-bit over schema id, a 0x1f separator and the tag, as 16 hex digits.
std::string match_key(std::string_view schema_id, std::string_view tag);

struct GatewayOptions {
  int repair_retries = 2;
};

// Single choke point for model calls: request validation, response parsing,
// schema validation with bounded repair retries, usage accounting.
class Gateway {
 public:
  Gateway(std::shared_ptr<Backend> backend, GatewayOptions options = {});

  // Throws Error(kInvalidArgument) on duplicate ids.
  void register_schema(std::string id, nlohmann::json shape);
  const SchemaRegistry& schemas() const { return schemas_; }

  // Returns a response whose parsed value satisfies the schema and the
  // request validator. A failing response gets an assistant echo plus a
  // repair instruction appended and is retried up to repair_retries times;
  // then Error(kSchemaViolation). Backend errors propagate unchanged.
  ModelResponse complete(const ModelRequest& request);

  Usage usage_for(const std::string& scope) const;
  Usage total_usage() const;

  Backend& backend() { return *backend_; }

 private:
  std::shared_ptr<Backend> backend_;
  GatewayOptions options_;
  SchemaRegistry schemas_;
  mutable std::mutex usage_mutex_;
  std::map<std::string, Usage> usage_by_scope_;
  Usage total_;
};

// Pulls the first JSON object out of model text (tolerates ```json fences
// and surrounding prose). nullopt if none parses.
std::optional<nlohmann::json> extract_json(std::string_view text);

}  // namespace btr::llm

#endif  // BTR_LLM_GATEWAY_H_

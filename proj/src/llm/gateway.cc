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

#include "btr/llm/gateway.h"

#include <cstdio>

#include "btr/error.h"

namespace btr::llm {

std::string_view effort_name(ReasoningEffort effort) {
  switch (effort) {
    case ReasoningEffort::kLow: return "low";
    case ReasoningEffort::kMedium: return "medium";
    case ReasoningEffort::kHigh: return "high";
  }
  return "low";
}

ReasoningEffort parse_effort(std::string_view name) {
  if (name == "low") return ReasoningEffort::kLow;
  if (name == "medium") return ReasoningEffort::kMedium;
  if (name == "high") return ReasoningEffort::kHigh;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown reasoning effort \"" + std::string(name) + "\"");
}

Usage& Usage::operator+=(const Usage& other) {
  prompt_tokens += other.prompt_tokens;
  completion_tokens += other.completion_tokens;
  calls += other.calls;
  return *this;
}

std::string match_key(std::string_view schema_id, std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto mix = [&h](unsigned char c) {
    h ^= c;
    h *= 0x100000001b3ULL;
  };
  for (char c : schema_id) mix(static_cast<unsigned char>(c));
  mix(0x1f);
  for (char c : tag) mix(static_cast<unsigned char>(c));
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::optional<nlohmann::json> extract_json(std::string_view text) {
  if (auto direct = nlohmann::json::parse(text, nullptr, false);
      !direct.is_discarded() && direct.is_object()) {
    return direct;
  }
  // Scan for a balanced {...} region, respecting string literals.
  for (std::size_t start = text.find('{'); start != std::string_view::npos;
       start = text.find('{', start + 1)) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < text.size(); ++i) {
      const char c = text[i];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}' && --depth == 0) {
        auto candidate =
            nlohmann::json::parse(text.substr(start, i - start + 1), nullptr, false);
        if (!candidate.is_discarded() && candidate.is_object()) return candidate;
        break;
      }
    }
  }
  return std::nullopt;
}

Gateway::Gateway(std::shared_ptr<Backend> backend, GatewayOptions options)
    : backend_(std::move(backend)), options_(options) {
  if (!backend_) throw Error(ErrorCode::kInvalidArgument, "gateway needs a backend");
  if (options_.repair_retries < 0) {
    throw Error(ErrorCode::kInvalidArgument, "repair_retries must be >= 0");
  }
  register_builtin_schemas(schemas_);
}

void Gateway::register_schema(std::string id, nlohmann::json shape) {
  schemas_.register_schema(std::move(id), std::move(shape));
}

ModelResponse Gateway::complete(const ModelRequest& request) {
  if (request.messages.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "model request " + request.tag + " has no messages");
  }
  const auto shape = [&] {
    try {
      return schemas_.shape(request.schema_id);
    } catch (const Error&) {
      throw Error(ErrorCode::kInvalidArgument,
                  "model request " + request.tag + " uses unregistered schema \"" +
                      request.schema_id + "\"");
    }
  }();

  ModelRequest attempt = request;
  ModelResponse response;
  response.attempts = 0;
  std::string last_problem;
  for (int i = 0; i <= options_.repair_retries; ++i) {
    RawCompletion raw = backend_->send(attempt);
    raw.usage.calls = 1;
    response.usage += raw.usage;
    response.attempts += 1;
    {
      std::lock_guard lock(usage_mutex_);
      usage_by_scope_[request.scope] += raw.usage;
      total_ += raw.usage;
    }

    std::optional<std::string> problem;
    auto parsed = extract_json(raw.text);
    if (!parsed) {
      problem = "reply is not a JSON object";
    } else if (auto err = check_shape(shape, *parsed)) {
      problem = *err;
    } else if (request.validator) {
      problem = request.validator(*parsed);
    }
    if (!problem) {
      response.raw_text = std::move(raw.text);
      response.parsed = std::move(*parsed);
      return response;
    }
    last_problem = *problem;
    attempt.messages.push_back({"assistant", raw.text});
    attempt.messages.push_back(
        {"user", "Your previous reply was rejected: " + *problem +
                     ". Reply again with only a JSON object matching this shape:\n" +
                     shape.dump()});
  }
  throw Error(ErrorCode::kSchemaViolation,
              "model request " + request.tag + " (" + request.schema_id +
                  ") failed validation after " + std::to_string(response.attempts) +
                  " attempts: " + last_problem);
}

Usage Gateway::usage_for(const std::string& scope) const {
  std::lock_guard lock(usage_mutex_);
  const auto it = usage_by_scope_.find(scope);
  return it == usage_by_scope_.end() ? Usage{} : it->second;
}

Usage Gateway::total_usage() const {
  std::lock_guard lock(usage_mutex_);
  return total_;
}

}  // namespace btr::llm

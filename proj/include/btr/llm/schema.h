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

#ifndef BTR_LLM_SCHEMA_H_
#define BTR_LLM_SCHEMA_H_

#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>

#include "json.hpp"

namespace btr::llm {

// Structured-output shapes use a small JSON-Schema subset:
//   "type": object | array | string | number | integer | boolean
//   "properties", "required"                       (objects)
//   "items", "minItems", "maxItems"                 (arrays)
//   "enum", "minLength"                             (strings)
// Returns a description of the first violation, or nullopt if value conforms.
std::optional<std::string> check_shape(const nlohmann::json& shape,
                                       const nlohmann::json& value);

inline constexpr std::string_view kBeliefPosteriorsSchema = "belief-posteriors";
inline constexpr std::string_view kInterviewerQuestionSchema = "interviewer-question";
inline constexpr std::string_view kApplicantReplySchema = "applicant-reply";
inline constexpr std::string_view kSanitizedReplySchema = "sanitized-reply";

class SchemaRegistry {
 public:
  // Throws Error(kInvalidArgument) if id is already registered or the shape
  // is not an object with a "type".
  void register_schema(std::string id, nlohmann::json shape);

  bool contains(std::string_view id) const;
  // Throws Error(kNotFound) for unknown ids.
  nlohmann::json shape(std::string_view id) const;

 private:
  mutable std::shared_mutex mutex_;
  std::map<std::string, nlohmann::json, std::less<>> shapes_;
};

// Registers the four shapes the judge, interviewer, applicant and sanitizer
// use.
void register_builtin_schemas(SchemaRegistry& registry);

}  // namespace btr::llm

#endif  // BTR_LLM_SCHEMA_H_

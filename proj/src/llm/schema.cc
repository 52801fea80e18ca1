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

#include "btr/llm/schema.h"

#include <mutex>

#include "btr/error.h"

namespace btr::llm {
namespace {

std::optional<std::string> check_at(const nlohmann::json& shape,
                                    const nlohmann::json& value,
                                    const std::string& path) {
  const std::string type = shape.value("type", std::string());
  const auto fail = [&](const std::string& what) {
    return std::optional<std::string>((path.empty() ? "$" : path) + ": " + what);
  };

  if (type == "object") {
    if (!value.is_object()) return fail("expected object");
    if (shape.contains("required")) {
      for (const auto& key : shape.at("required")) {
        if (!value.contains(key.get<std::string>())) {
          return fail("missing required property \"" + key.get<std::string>() + "\"");
        }
      }
    }
    if (shape.contains("properties")) {
      for (const auto& [key, sub] : shape.at("properties").items()) {
        if (!value.contains(key)) continue;
        if (auto err = check_at(sub, value.at(key), path + "." + key)) return err;
      }
    }
    return std::nullopt;
  }
  if (type == "array") {
    if (!value.is_array()) return fail("expected array");
    if (shape.contains("minItems") && value.size() < shape.at("minItems").get<std::size_t>()) {
      return fail("fewer than " + shape.at("minItems").dump() + " items");
    }
    if (shape.contains("maxItems") && value.size() > shape.at("maxItems").get<std::size_t>()) {
      return fail("more than " + shape.at("maxItems").dump() + " items");
    }
    if (shape.contains("items")) {
      for (std::size_t i = 0; i < value.size(); ++i) {
        if (auto err = check_at(shape.at("items"), value[i],
                                path + "[" + std::to_string(i) + "]")) {
          return err;
        }
      }
    }
    return std::nullopt;
  }
  if (type == "string") {
    if (!value.is_string()) return fail("expected string");
    const auto& s = value.get_ref<const std::string&>();
    if (shape.contains("minLength") && s.size() < shape.at("minLength").get<std::size_t>()) {
      return fail("string shorter than " + shape.at("minLength").dump());
    }
    if (shape.contains("enum")) {
      for (const auto& option : shape.at("enum")) {
        if (option == value) return std::nullopt;
      }
      return fail("\"" + s + "\" not one of " + shape.at("enum").dump());
    }
    return std::nullopt;
  }
  if (type == "number") {
    if (!value.is_number()) return fail("expected number");
    return std::nullopt;
  }
  if (type == "integer") {
    if (!value.is_number_integer()) return fail("expected integer");
    return std::nullopt;
  }
  if (type == "boolean") {
    if (!value.is_boolean()) return fail("expected boolean");
    return std::nullopt;
  }
  return fail("shape has unsupported type \"" + type + "\"");
}

nlohmann::json single_string_shape(const char* field) {
  return {{"type", "object"},
          {"required", {field}},
          {"properties", {{field, {{"type", "string"}, {"minLength", 1}}}}}};
}

}  // namespace

std::optional<std::string> check_shape(const nlohmann::json& shape,
                                       const nlohmann::json& value) {
  return check_at(shape, value, "");
}

void SchemaRegistry::register_schema(std::string id, nlohmann::json shape) {
  if (id.empty()) throw Error(ErrorCode::kInvalidArgument, "empty schema id");
  if (!shape.is_object() || !shape.contains("type")) {
    throw Error(ErrorCode::kInvalidArgument,
                "schema " + id + " must be an object with a \"type\"");
  }
  std::unique_lock lock(mutex_);
  if (shapes_.contains(id)) {
    throw Error(ErrorCode::kInvalidArgument, "schema " + id + " already registered");
  }
  shapes_.emplace(std::move(id), std::move(shape));
}

bool SchemaRegistry::contains(std::string_view id) const {
  std::shared_lock lock(mutex_);
  return shapes_.find(id) != shapes_.end();
}

nlohmann::json SchemaRegistry::shape(std::string_view id) const {
  std::shared_lock lock(mutex_);
  const auto it = shapes_.find(id);
  if (it == shapes_.end()) {
    throw Error(ErrorCode::kNotFound, "schema " + std::string(id) + " not registered");
  }
  return it->second;
}

void register_builtin_schemas(SchemaRegistry& registry) {
  // Per-dimension L probabilities plus a justification; the judge checks
  // names and L against the rubric on top of this shape.
  registry.register_schema(
      std::string(kBeliefPosteriorsSchema),
      {{"type", "object"},
       {"required", {"dimensions"}},
       {"properties",
        {{"dimensions",
          {{"type", "array"},
           {"minItems", 1},
           {"items",
            {{"type", "object"},
             {"required", {"name", "probabilities", "justification"}},
             {"properties",
              {{"name", {{"type", "string"}, {"minLength", 1}}},
               {"probabilities",
                {{"type", "array"}, {"minItems", 2}, {"items", {{"type", "number"}}}}},
               {"justification", {{"type", "string"}}},
               {"classification",
                {{"type", "string"},
                 {"enum",
                  {"none", "addition", "debasement", "repetition", "irrelevant"}}}}}}}}}}}}});
  registry.register_schema(std::string(kInterviewerQuestionSchema),
                           single_string_shape("question"));
  registry.register_schema(std::string(kApplicantReplySchema),
                           single_string_shape("reply"));
  registry.register_schema(std::string(kSanitizedReplySchema),
                           single_string_shape("reply"));
}

}  // namespace btr::llm

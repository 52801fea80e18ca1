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

#include "btr/error.h"
#include "btr/io.h"
#include "btr/llm/backends.h"

namespace btr::llm {
namespace {

// Rough token estimate so scripted runs still produce cost reports.
std::int64_t estimate_tokens(std::size_t chars) {
  return static_cast<std::int64_t>((chars + 3) / 4);
}

}  // namespace

ScriptedBackend::ScriptedBackend(std::vector<ScriptEntry> entries) {
  for (auto& e : entries) add(std::move(e));
}

void ScriptedBackend::add(const std::string& schema_id, const std::string& tag,
                          nlohmann::json response) {
  add(ScriptEntry{match_key(schema_id, tag), std::move(response), schema_id, tag});
}

void ScriptedBackend::add(ScriptEntry entry) {
  if (entry.match_key.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "script entry without a match key");
  }
  const auto key = entry.match_key;
  if (!entries_.emplace(key, std::move(entry)).second) {
    throw Error(ErrorCode::kInvalidArgument, "duplicate script match key " + key);
  }
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_json(const nlohmann::json& script) {
  if (!script.is_array()) {
    throw Error(ErrorCode::kParse, "script must be a JSON array of entries");
  }
  auto backend = std::make_shared<ScriptedBackend>();
  for (const auto& item : script) {
    if (!item.is_object() || !item.contains("response")) {
      throw Error(ErrorCode::kParse, "script entry needs a \"response\"");
    }
    ScriptEntry entry;
    entry.response = item.at("response");
    entry.schema_id = item.value("schema", std::string());
    entry.tag = item.value("tag", std::string());
    if (item.contains("match_key")) {
      entry.match_key = item.at("match_key").get<std::string>();
    } else if (!entry.schema_id.empty() && !entry.tag.empty()) {
      entry.match_key = match_key(entry.schema_id, entry.tag);
    } else {
      throw Error(ErrorCode::kParse,
                  "script entry needs \"match_key\" or both \"schema\" and \"tag\"");
    }
    backend->add(std::move(entry));
  }
  return backend;
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_file(
    const std::filesystem::path& path) {
  return from_json(read_json_file(path));
}

RawCompletion ScriptedBackend::send(const ModelRequest& request) {
  const auto key = match_key(request.schema_id, request.tag);
  auto it = entries_.find(key);
  if (it == entries_.end()) it = entries_.find(match_key(request.schema_id, "*"));
  if (it == entries_.end()) {
    throw Error(ErrorCode::kScriptMiss, "script miss: no entry for key " + key +
                                            " (schema \"" + request.schema_id +
                                            "\", tag \"" + request.tag + "\")");
  }
  RawCompletion out;
  out.text = it->second.response.dump();
  std::size_t prompt_chars = request.system_prompt.size();
  for (const auto& m : request.messages) prompt_chars += m.content.size();
  out.usage.prompt_tokens = estimate_tokens(prompt_chars);
  out.usage.completion_tokens = estimate_tokens(out.text.size());
  return out;
}

nlohmann::ordered_json ScriptedBackend::to_json() const {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& [key, entry] : entries_) {
    nlohmann::ordered_json j;
    j["match_key"] = key;
    if (!entry.schema_id.empty()) j["schema"] = entry.schema_id;
    if (!entry.tag.empty()) j["tag"] = entry.tag;
    j["response"] = entry.response;
    out.push_back(std::move(j));
  }
  return out;
}

}  // namespace btr::llm

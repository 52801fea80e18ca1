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

#include "btr/prompts.h"

#include "btr/error.h"
#include "btr/io.h"

namespace btr {
namespace {

constexpr std::string_view kSystemMarker = "[system]";
constexpr std::string_view kUserMarker = "[user]";

bool is_slot_char(char c) { return (c >= 'a' && c <= 'z') || c == '_'; }

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

// Calls fn(begin, end, name) for every "{name}" placeholder in text.
template <typename Fn>
void for_each_slot(std::string_view text, Fn&& fn) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '{') continue;
    std::size_t j = i + 1;
    while (j < text.size() && is_slot_char(text[j])) ++j;
    if (j > i + 1 && j < text.size() && text[j] == '}') {
      fn(i, j + 1, text.substr(i + 1, j - i - 1));
      i = j;
    }
  }
}

// "judge_pba.v1" -> ("judge_pba", "v1"); no version -> ("name", "v0").
std::pair<std::string, std::string> split_name(std::string_view name) {
  const auto dot = name.rfind('.');
  if (dot == std::string_view::npos) return {std::string(name), "v0"};
  return {std::string(name.substr(0, dot)), std::string(name.substr(dot + 1))};
}

int version_number(const std::string& version) {
  if (version.size() > 1 && version[0] == 'v') {
    try {
      return std::stoi(version.substr(1));
    } catch (const std::exception&) {
    }
  }
  return 0;
}

}  // namespace

PromptTemplate::PromptTemplate(std::string id, std::string version,
                               std::string_view text)
    : id_(std::move(id)), version_(std::move(version)) {
  const auto sys = text.find(kSystemMarker);
  const auto usr = text.find(kUserMarker);
  if (sys == std::string_view::npos && usr == std::string_view::npos) {
    user_ = trim(text);
    return;
  }
  if (sys != std::string_view::npos) {
    const auto start = sys + kSystemMarker.size();
    const auto end = (usr != std::string_view::npos && usr > sys) ? usr : text.size();
    system_ = trim(text.substr(start, end - start));
  }
  if (usr != std::string_view::npos) {
    const auto start = usr + kUserMarker.size();
    const auto end = (sys != std::string_view::npos && sys > usr) ? sys : text.size();
    user_ = trim(text.substr(start, end - start));
  }
}

std::set<std::string> PromptTemplate::placeholders() const {
  std::set<std::string> out;
  const auto collect = [&out](std::size_t, std::size_t, std::string_view name) {
    out.emplace(name);
  };
  for_each_slot(system_, collect);
  for_each_slot(user_, collect);
  return out;
}

std::string PromptTemplate::render(std::string_view part,
                                   const std::map<std::string, std::string>& slots) {
  std::string out;
  std::size_t copied = 0;
  for_each_slot(part, [&](std::size_t begin, std::size_t end, std::string_view name) {
    const auto it = slots.find(std::string(name));
    if (it == slots.end()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "prompt slot {" + std::string(name) + "} has no value");
    }
    out.append(part.substr(copied, begin - copied));
    out.append(it->second);
    copied = end;
  });
  out.append(part.substr(copied));
  return out;
}

PromptLibrary PromptLibrary::builtin() {
  PromptLibrary library;
  for (const auto& embedded : embedded_prompts()) {
    auto [id, version] = split_name(embedded.name);
    library.add(PromptTemplate(std::move(id), std::move(version), embedded.text));
  }
  return library;
}

PromptLibrary PromptLibrary::with_overrides(const std::filesystem::path& dir) {
  PromptLibrary library = builtin();
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::kIo, "prompt directory " + dir.string() + " not found");
  }
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".txt") continue;
    auto [id, version] = split_name(entry.path().stem().string());
    library.add(PromptTemplate(std::move(id), std::move(version),
                               read_text_file(entry.path())));
  }
  return library;
}

void PromptLibrary::add(PromptTemplate prompt) {
  const auto it = prompts_.find(prompt.id());
  if (it != prompts_.end() &&
      version_number(it->second.version()) > version_number(prompt.version())) {
    return;
  }
  std::string id = prompt.id();
  prompts_.insert_or_assign(std::move(id), std::move(prompt));
}

const PromptTemplate& PromptLibrary::get(std::string_view id) const {
  const auto it = prompts_.find(id);
  if (it == prompts_.end()) {
    throw Error(ErrorCode::kNotFound, "no prompt asset \"" + std::string(id) + "\"");
  }
  return it->second;
}

bool PromptLibrary::contains(std::string_view id) const {
  return prompts_.find(id) != prompts_.end();
}

}  // namespace btr

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

#ifndef BTR_PROMPTS_H_
#define BTR_PROMPTS_H_

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace btr {

// A prompt asset "<id>.<version>.txt". The text may contain "[system]" and
// "[user]" section markers; without markers the whole text is the user part.
// Placeholders are "{slot_name}" with slot names in [a-z_].
class PromptTemplate {
 public:
  PromptTemplate() = default;
  PromptTemplate(std::string id, std::string version, std::string_view text);

  const std::string& id() const { return id_; }
  const std::string& version() const { return version_; }
  const std::string& system() const { return system_; }
  const std::string& user() const { return user_; }

  std::set<std::string> placeholders() const;

  // Fills every placeholder of `part`. Throws Error(kInvalidArgument) if the
  // template uses a slot that is not supplied.
  static std::string render(std::string_view part,
                            const std::map<std::string, std::string>& slots);

 private:
  std::string id_;
  std::string version_;
  std::string system_;
  std::string user_;
};

struct EmbeddedPrompt {
  const char* name;  // "<id>.<version>"
  const char* text;
};

// Assets compiled into the binary from assets/prompts.
const std::vector<EmbeddedPrompt>& embedded_prompts();

// Prompt templates by id; the highest version wins when several are present.
class PromptLibrary {
 public:
  static PromptLibrary builtin();
  // Built-in prompts overridden by any "<id>.<version>.txt" in dir.
  static PromptLibrary with_overrides(const std::filesystem::path& dir);

  void add(PromptTemplate prompt);
  // Throws Error(kNotFound).
  const PromptTemplate& get(std::string_view id) const;
  bool contains(std::string_view id) const;

 private:
  std::map<std::string, PromptTemplate, std::less<>> prompts_;
};

}  // namespace btr

#endif  // BTR_PROMPTS_H_

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

#ifndef BTR_IO_H_
#define BTR_IO_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace btr {

// File helpers. All throw Error(kIo) on failure and Error(kParse) on
// malformed JSON.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);
void append_text_file(const std::filesystem::path& path, std::string_view text);

nlohmann::json read_json_file(const std::filesystem::path& path);
// Blank lines are skipped.
std::vector<nlohmann::json> read_jsonl_file(const std::filesystem::path& path);

nlohmann::json parse_json(std::string_view text, std::string_view what);

// Pretty JSON with a trailing newline.
std::string dump_pretty(const nlohmann::ordered_json& j);

// Non-empty trimmed lines, '#' comments skipped.
std::vector<std::string> read_lines(const std::filesystem::path& path);

}  // namespace btr

#endif  // BTR_IO_H_

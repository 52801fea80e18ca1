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

#include "btr/rubric.h"

#include <set>
#include <sstream>

#include "btr/error.h"
#include "btr/io.h"

namespace btr {
namespace {

[[noreturn]] void invalid(const std::string& message) {
  throw Error(ErrorCode::kInvalidArgument, message);
}

std::string require_string(const nlohmann::json& j, const char* key,
                           const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_string()) {
    throw Error(ErrorCode::kParse,
                where + ": missing string field \"" + key + "\"");
  }
  return j.at(key).get<std::string>();
}

std::vector<std::string> require_string_array(const nlohmann::json& j,
                                              const char* key,
                                              const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_array()) {
    throw Error(ErrorCode::kParse,
                where + ": missing array field \"" + key + "\"");
  }
  std::vector<std::string> out;
  for (const auto& item : j.at(key)) {
    if (!item.is_string()) {
      throw Error(ErrorCode::kParse,
                  where + ": \"" + key + "\" must contain only strings");
    }
    out.push_back(item.get<std::string>());
  }
  return out;
}

}  // namespace

const std::string& Dimension::anchor(int level) const {
  if (level < 1 || level > static_cast<int>(anchors.size())) {
    throw Error(ErrorCode::kOutOfRange,
                "level " + std::to_string(level) + " outside 1.." +
                    std::to_string(anchors.size()) + " for " + name);
  }
  return anchors[static_cast<std::size_t>(level - 1)];
}

Rubric::Rubric(std::string id, std::string domain_name,
               std::vector<std::string> level_labels,
               std::vector<Dimension> dimensions)
    : id_(std::move(id)),
      domain_name_(std::move(domain_name)),
      level_labels_(std::move(level_labels)),
      dimensions_(std::move(dimensions)) {
  if (id_.empty()) invalid("rubric id is empty");
  if (level_labels_.size() < 2) {
    invalid("rubric " + id_ + " declares " +
            std::to_string(level_labels_.size()) + " levels; need L >= 2");
  }
  std::set<std::string> labels;
  for (const auto& label : level_labels_) {
    if (label.empty()) invalid("rubric " + id_ + " has an empty level label");
    if (!labels.insert(label).second) {
      invalid("rubric " + id_ + " repeats level label \"" + label + "\"");
    }
  }
  if (dimensions_.empty()) invalid("rubric " + id_ + " has no dimensions");
  std::set<std::string> names;
  for (const auto& dim : dimensions_) {
    if (dim.name.empty()) invalid("rubric " + id_ + " has an unnamed dimension");
    if (!names.insert(dim.name).second) {
      invalid("duplicate dimension name \"" + dim.name + "\" in rubric " + id_);
    }
    if (dim.anchors.size() != level_labels_.size()) {
      invalid("anchor count mismatch: dimension \"" + dim.name + "\" has " +
              std::to_string(dim.anchors.size()) + " anchors, rubric declares L=" +
              std::to_string(level_labels_.size()));
    }
    for (std::size_t i = 0; i < dim.anchors.size(); ++i) {
      if (dim.anchors[i].empty()) {
        invalid("empty anchor at level " + std::to_string(i + 1) +
                " of dimension \"" + dim.name + "\"");
      }
    }
  }
}

std::optional<std::size_t> Rubric::dimension_index(std::string_view name) const {
  for (std::size_t d = 0; d < dimensions_.size(); ++d) {
    if (dimensions_[d].name == name) return d;
  }
  return std::nullopt;
}

LevelLabel Rubric::level(int index) const {
  if (index < 1 || index > num_levels()) {
    throw Error(ErrorCode::kOutOfRange,
                "level index " + std::to_string(index) + " outside 1.." +
                    std::to_string(num_levels()));
  }
  return {index, level_labels_[static_cast<std::size_t>(index - 1)]};
}

std::optional<int> Rubric::level_index(std::string_view label) const {
  for (std::size_t i = 0; i < level_labels_.size(); ++i) {
    if (level_labels_[i] == label) return static_cast<int>(i) + 1;
  }
  return std::nullopt;
}

Rubric Rubric::with_dimension(const Dimension& extra) const {
  auto dims = dimensions_;
  dims.push_back(extra);
  return Rubric(id_, domain_name_, level_labels_, std::move(dims));
}

Rubric load_rubric(std::string_view source) {
  const auto doc = parse_json(source, "rubric");
  if (!doc.is_object()) throw Error(ErrorCode::kParse, "rubric: not an object");
  const std::string id = require_string(doc, "id", "rubric");
  const std::string where = "rubric " + id;
  auto domain = require_string(doc, "domain_name", where);
  auto levels = require_string_array(doc, "levels", where);
  if (!doc.contains("dimensions") || !doc.at("dimensions").is_array()) {
    throw Error(ErrorCode::kParse, where + ": missing array \"dimensions\"");
  }
  std::vector<Dimension> dims;
  for (const auto& item : doc.at("dimensions")) {
    if (!item.is_object()) {
      throw Error(ErrorCode::kParse, where + ": dimension is not an object");
    }
    Dimension dim;
    dim.name = require_string(item, "name", where);
    dim.anchors = require_string_array(item, "anchors", where + "/" + dim.name);
    dims.push_back(std::move(dim));
  }
  return Rubric(id, std::move(domain), std::move(levels), std::move(dims));
}

Rubric load_rubric_file(const std::string& path) {
  return load_rubric(read_text_file(path));
}

nlohmann::ordered_json rubric_to_json(const Rubric& rubric) {
  nlohmann::ordered_json j;
  j["id"] = rubric.id();
  j["domain_name"] = rubric.domain_name();
  j["levels"] = rubric.level_labels();
  j["dimensions"] = nlohmann::ordered_json::array();
  for (const auto& dim : rubric.dimensions()) {
    nlohmann::ordered_json d;
    d["name"] = dim.name;
    d["anchors"] = dim.anchors;
    j["dimensions"].push_back(std::move(d));
  }
  return j;
}

std::string serialize_rubric(const Rubric& rubric) {
  return dump_pretty(rubric_to_json(rubric));
}

std::string render_rubric(const Rubric& rubric) {
  std::ostringstream out;
  out << "Rubric: " << rubric.domain_name() << " (" << rubric.num_dimensions()
      << " dimensions, levels";
  for (int l = 1; l <= rubric.num_levels(); ++l) {
    out << (l == 1 ? " " : ", ") << l << "=" << rubric.level(l).label;
  }
  out << ")\n";
  for (const auto& dim : rubric.dimensions()) {
    out << "\n## " << dim.name << "\n";
    for (int l = 1; l <= rubric.num_levels(); ++l) {
      out << "- level " << l << " (" << rubric.level(l).label
          << "): " << dim.anchor(l) << "\n";
    }
  }
  return out.str();
}

}  // namespace btr

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

#ifndef BTR_RUBRIC_H_
#define BTR_RUBRIC_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace btr {

// One rubric dimension. anchors[0] describes level 1 (lowest), anchors[L-1]
// level L (highest).
struct Dimension {
  std::string name;
  std::vector<std::string> anchors;

  // Anchor text for a 1-based level.
  const std::string& anchor(int level) const;

  bool operator==(const Dimension&) const = default;
};

struct LevelLabel {
  int index = 0;  // 1-based
  std::string label;

  bool operator==(const LevelLabel&) const = default;
};

// D dimensions x L ordinal levels of natural-language anchors.
//
// Anchors are expected to be non-evidentiary (independent of what any
// applicant says), falsifiable (inferable KSA, no strongly subjective
// qualifiers) and internally consistent (everything in one anchor plausible
// at the same level). Those are authoring rules; the loader only checks
// structure: D >= 1, L >= 2, unique dimension names, exactly L non-empty
// anchors per dimension, unique non-empty level labels.
class Rubric {
 public:
  Rubric() = default;
  // Throws Error(kInvalidArgument) if any structural invariant fails.
  Rubric(std::string id, std::string domain_name,
         std::vector<std::string> level_labels,
         std::vector<Dimension> dimensions);

  const std::string& id() const { return id_; }
  const std::string& domain_name() const { return domain_name_; }
  const std::vector<Dimension>& dimensions() const { return dimensions_; }
  const std::vector<std::string>& level_labels() const { return level_labels_; }

  std::size_t num_dimensions() const { return dimensions_.size(); }
  int num_levels() const { return static_cast<int>(level_labels_.size()); }

  std::optional<std::size_t> dimension_index(std::string_view name) const;

  LevelLabel level(int index) const;
  // Inverse of level(); nullopt for unknown labels.
  std::optional<int> level_index(std::string_view label) const;

  // Copy of this rubric with one more dimension appended. Throws on a name
  // collision or anchor-count mismatch.
  Rubric with_dimension(const Dimension& extra) const;

  bool operator==(const Rubric&) const = default;

 private:
  std::string id_;
  std::string domain_name_;
  std::vector<std::string> level_labels_;
  std::vector<Dimension> dimensions_;
};

// Parses the rubric JSON document:
//   {"id", "domain_name", "levels": [..L], "dimensions": [{"name", "anchors"}]}
Rubric load_rubric(std::string_view source);
Rubric load_rubric_file(const std::string& path);

nlohmann::ordered_json rubric_to_json(const Rubric& rubric);
std::string serialize_rubric(const Rubric& rubric);

// Plain-text rendering used inside prompts. Dimension order is document order.
std::string render_rubric(const Rubric& rubric);

}  // namespace btr

#endif  // BTR_RUBRIC_H_

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

#ifndef BTR_BELIEF_H_
#define BTR_BELIEF_H_

#include <string>
#include <string_view>
#include <vector>

#include "btr/rubric.h"
#include "json.hpp"

namespace btr {

inline constexpr double kSimplexTolerance = 1e-9;

// Turn numbering: -1 is the pre-resume uniform prior, 0 the resume-only
// belief, t >= 1 the belief after interview turn t.
inline constexpr int kPriorTurn = -1;

using Distribution = std::vector<double>;

struct BeliefState {
  int turn = kPriorTurn;
  // posteriors[d] is the distribution over L levels for dimension d, in
  // rubric dimension order.
  std::vector<Distribution> posteriors;

  bool operator==(const BeliefState&) const = default;
};

BeliefState uniform_belief(const Rubric& rubric);

// Every violated invariant, one human-readable line each. Empty iff valid.
std::vector<std::string> validate_belief(const BeliefState& belief,
                                         const Rubric& rubric);

enum class UpdateClass {
  kNone,
  kAddition,
  kDebasement,
  kRepetition,
  kIrrelevant,
};

std::string_view update_class_name(UpdateClass c);
// Throws Error(kParse) on unknown names.
UpdateClass parse_update_class(std::string_view name);

// Per-turn, per-dimension record of how the judge moved its belief and why.
struct AuditEntry {
  std::string dimension;
  Distribution before;
  Distribution after;
  std::string justification;
  UpdateClass classification = UpdateClass::kNone;

  bool operator==(const AuditEntry&) const = default;
};

// max_l |after(l) - before(l)|
double linf_change(const Distribution& before, const Distribution& after);

nlohmann::ordered_json audit_entry_to_json(const AuditEntry& entry);
AuditEntry audit_entry_from_json(const nlohmann::json& j);

// One belief-log line: {"turn", "posteriors": {dimension: [..L]}, "audit": [..]}
nlohmann::ordered_json belief_record_to_json(const BeliefState& belief,
                                             const std::vector<AuditEntry>& audit,
                                             const Rubric& rubric);

struct BeliefRecord {
  BeliefState belief;
  std::vector<AuditEntry> audit;
};

// Inverse of belief_record_to_json; posteriors are reordered into rubric
// dimension order. Throws Error(kParse) on missing or unknown dimensions.
BeliefRecord belief_record_from_json(const nlohmann::json& j,
                                     const Rubric& rubric);

// Renders posteriors as "name: [p1, p2, p3]" lines for prompts.
std::string render_belief(const BeliefState& belief, const Rubric& rubric);

}  // namespace btr

#endif  // BTR_BELIEF_H_

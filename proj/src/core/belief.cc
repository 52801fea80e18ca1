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

#include "btr/belief.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "btr/error.h"

namespace btr {

BeliefState uniform_belief(const Rubric& rubric) {
  const auto levels = static_cast<std::size_t>(rubric.num_levels());
  BeliefState belief;
  belief.turn = kPriorTurn;
  belief.posteriors.assign(rubric.num_dimensions(),
                           Distribution(levels, 1.0 / static_cast<double>(levels)));
  return belief;
}

std::vector<std::string> validate_belief(const BeliefState& belief,
                                         const Rubric& rubric) {
  std::vector<std::string> report;
  if (belief.turn < kPriorTurn) {
    report.push_back("turn " + std::to_string(belief.turn) + " < -1");
  }
  if (belief.posteriors.size() != rubric.num_dimensions()) {
    report.push_back("dimension count mismatch: " +
                     std::to_string(belief.posteriors.size()) +
                     " posteriors for D=" +
                     std::to_string(rubric.num_dimensions()));
  }
  const auto levels = static_cast<std::size_t>(rubric.num_levels());
  const auto n = std::min(belief.posteriors.size(), rubric.num_dimensions());
  for (std::size_t d = 0; d < belief.posteriors.size(); ++d) {
    const auto& p = belief.posteriors[d];
    const std::string name =
        d < n ? rubric.dimensions()[d].name : "#" + std::to_string(d);
    if (p.size() != levels) {
      report.push_back(name + ": " + std::to_string(p.size()) +
                       " levels, expected " + std::to_string(levels));
    }
    double sum = 0.0;
    bool negative = false;
    bool finite = true;
    for (double v : p) {
      if (!std::isfinite(v)) finite = false;
      if (v < 0.0) negative = true;
      sum += v;
    }
    if (!finite) {
      report.push_back(name + ": non-finite probability");
      continue;
    }
    if (negative) report.push_back(name + ": negative mass");
    if (std::abs(sum - 1.0) > kSimplexTolerance) {
      std::ostringstream msg;
      msg << name << ": sum " << sum << " != 1";
      report.push_back(msg.str());
    }
  }
  return report;
}

std::string_view update_class_name(UpdateClass c) {
  switch (c) {
    case UpdateClass::kNone: return "none";
    case UpdateClass::kAddition: return "addition";
    case UpdateClass::kDebasement: return "debasement";
    case UpdateClass::kRepetition: return "repetition";
    case UpdateClass::kIrrelevant: return "irrelevant";
  }
  return "none";
}

UpdateClass parse_update_class(std::string_view name) {
  for (auto c : {UpdateClass::kNone, UpdateClass::kAddition,
                 UpdateClass::kDebasement, UpdateClass::kRepetition,
                 UpdateClass::kIrrelevant}) {
    if (update_class_name(c) == name) return c;
  }
  throw Error(ErrorCode::kParse,
              "unknown update classification \"" + std::string(name) + "\"");
}

double linf_change(const Distribution& before, const Distribution& after) {
  if (before.size() != after.size()) {
    throw Error(ErrorCode::kInvalidArgument, "distribution length mismatch");
  }
  double m = 0.0;
  for (std::size_t i = 0; i < before.size(); ++i) {
    m = std::max(m, std::abs(after[i] - before[i]));
  }
  return m;
}

nlohmann::ordered_json audit_entry_to_json(const AuditEntry& entry) {
  nlohmann::ordered_json j;
  j["dimension"] = entry.dimension;
  j["before"] = entry.before;
  j["after"] = entry.after;
  j["justification"] = entry.justification;
  j["classification"] = std::string(update_class_name(entry.classification));
  return j;
}

AuditEntry audit_entry_from_json(const nlohmann::json& j) {
  try {
    AuditEntry e;
    e.dimension = j.at("dimension").get<std::string>();
    e.before = j.at("before").get<Distribution>();
    e.after = j.at("after").get<Distribution>();
    e.justification = j.value("justification", std::string());
    e.classification =
        parse_update_class(j.value("classification", std::string("none")));
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::kParse, std::string("audit entry: ") + ex.what());
  }
}

nlohmann::ordered_json belief_record_to_json(const BeliefState& belief,
                                             const std::vector<AuditEntry>& audit,
                                             const Rubric& rubric) {
  if (belief.posteriors.size() != rubric.num_dimensions()) {
    throw Error(ErrorCode::kInvalidArgument,
                "belief does not match rubric " + rubric.id());
  }
  nlohmann::ordered_json j;
  j["turn"] = belief.turn;
  nlohmann::ordered_json posteriors = nlohmann::ordered_json::object();
  for (std::size_t d = 0; d < rubric.num_dimensions(); ++d) {
    posteriors[rubric.dimensions()[d].name] = belief.posteriors[d];
  }
  j["posteriors"] = std::move(posteriors);
  j["audit"] = nlohmann::ordered_json::array();
  for (const auto& entry : audit) j["audit"].push_back(audit_entry_to_json(entry));
  return j;
}

BeliefRecord belief_record_from_json(const nlohmann::json& j,
                                     const Rubric& rubric) {
  BeliefRecord record;
  try {
    record.belief.turn = j.at("turn").get<int>();
    const auto& posteriors = j.at("posteriors");
    if (!posteriors.is_object()) {
      throw Error(ErrorCode::kParse, "belief record: posteriors not an object");
    }
    record.belief.posteriors.resize(rubric.num_dimensions());
    std::vector<bool> seen(rubric.num_dimensions(), false);
    for (const auto& [name, value] : posteriors.items()) {
      const auto d = rubric.dimension_index(name);
      if (!d) {
        throw Error(ErrorCode::kParse,
                    "belief record: unknown dimension \"" + name + "\"");
      }
      record.belief.posteriors[*d] = value.get<Distribution>();
      seen[*d] = true;
    }
    for (std::size_t d = 0; d < seen.size(); ++d) {
      if (!seen[d]) {
        throw Error(ErrorCode::kParse, "belief record: missing dimension \"" +
                                           rubric.dimensions()[d].name + "\"");
      }
    }
    if (j.contains("audit")) {
      for (const auto& e : j.at("audit")) {
        record.audit.push_back(audit_entry_from_json(e));
      }
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::kParse, std::string("belief record: ") + ex.what());
  }
  return record;
}

std::string render_belief(const BeliefState& belief, const Rubric& rubric) {
  std::ostringstream out;
  out.precision(4);
  for (std::size_t d = 0; d < rubric.num_dimensions() && d < belief.posteriors.size();
       ++d) {
    out << rubric.dimensions()[d].name << ": [";
    const auto& p = belief.posteriors[d];
    for (std::size_t l = 0; l < p.size(); ++l) {
      out << (l ? ", " : "") << p[l];
    }
    out << "]\n";
  }
  return out.str();
}

}  // namespace btr

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

#include "btr/judge.h"

#include <cmath>
#include <map>
#include <sstream>

#include "btr/error.h"

namespace btr::judge {
namespace {

double expected_level(const Distribution& p) {
  double e = 0.0;
  for (std::size_t l = 0; l < p.size(); ++l) e += static_cast<double>(l + 1) * p[l];
  return e;
}

std::string output_format(const Rubric& rubric) {
  std::ostringstream out;
  out << "Return a JSON object {\"dimensions\": [...]} with exactly one element per "
         "rubric dimension, in rubric order. Each element is {\"name\": <dimension "
         "name>, \"probabilities\": [p_1, ..., p_"
      << rubric.num_levels()
      << "] (level 1 first), \"justification\": <string>, \"classification\": "
         "\"none\" | \"addition\" | \"debasement\" | \"repetition\" | "
         "\"irrelevant\"}.\nDimension names: ";
  for (std::size_t d = 0; d < rubric.num_dimensions(); ++d) {
    out << (d ? ", " : "") << '"' << rubric.dimensions()[d].name << '"';
  }
  return out.str();
}

// Parsed model output in rubric order.
struct ParsedPosteriors {
  std::vector<Distribution> posteriors;
  std::vector<std::string> justifications;
  std::vector<std::optional<UpdateClass>> classes;
};

// Throws Error(kSchemaViolation) with a repair-friendly message.
ParsedPosteriors parse_posteriors(const nlohmann::json& value, const Rubric& rubric,
                                  const BeliefState& prev, double epsilon) {
  const auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kSchemaViolation, what);
  };
  ParsedPosteriors out;
  const auto n = rubric.num_dimensions();
  out.posteriors.resize(n);
  out.justifications.resize(n);
  out.classes.resize(n);
  std::vector<bool> seen(n, false);
  for (const auto& item : value.at("dimensions")) {
    const auto name = item.at("name").get<std::string>();
    const auto d = rubric.dimension_index(name);
    if (!d) fail("unknown dimension \"" + name + "\"");
    if (seen[*d]) fail("dimension \"" + name + "\" appears twice");
    seen[*d] = true;
    const auto raw = item.at("probabilities").get<std::vector<double>>();
    if (raw.size() != static_cast<std::size_t>(rubric.num_levels())) {
      fail("dimension \"" + name + "\" has " + std::to_string(raw.size()) +
           " probabilities, expected " + std::to_string(rubric.num_levels()));
    }
    try {
      out.posteriors[*d] = renormalize(raw);
    } catch (const Error& e) {
      fail("dimension \"" + name + "\": " + e.what());
    }
    out.justifications[*d] = item.at("justification").get<std::string>();
    if (item.contains("classification")) {
      out.classes[*d] = parse_update_class(item.at("classification").get<std::string>());
    }
    if (linf_change(prev.posteriors[*d], out.posteriors[*d]) > epsilon &&
        out.justifications[*d].find_first_not_of(" \t\r\n") == std::string::npos) {
      fail("dimension \"" + name +
           "\" changed by more than the change threshold but has no justification");
    }
  }
  for (std::size_t d = 0; d < n; ++d) {
    if (!seen[d]) fail("missing dimension \"" + rubric.dimensions()[d].name + "\"");
  }
  return out;
}

}  // namespace

std::string_view policy_name(PolicyKind kind) {
  return kind == PolicyKind::kIndependent ? "independent" : "pba";
}

PolicyKind parse_policy(std::string_view name) {
  if (name == "independent") return PolicyKind::kIndependent;
  if (name == "pba") return PolicyKind::kPba;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown judge policy \"" + std::string(name) + "\"");
}

Distribution renormalize(std::span<const double> raw) {
  Distribution out(raw.begin(), raw.end());
  double sum = 0.0;
  for (auto& v : out) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kSchemaViolation, "non-finite probability");
    }
    if (v < 0.0) v = 0.0;
    sum += v;
  }
  if (sum < 0.5) {
    std::ostringstream msg;
    msg << "probabilities sum to " << sum << " (< 0.5)";
    throw Error(ErrorCode::kSchemaViolation, msg.str());
  }
  for (auto& v : out) v /= sum;
  return out;
}

UpdateClass derive_classification(const Distribution& before,
                                  const Distribution& after, double epsilon) {
  if (linf_change(before, after) <= epsilon) return UpdateClass::kNone;
  return expected_level(after) > expected_level(before) ? UpdateClass::kAddition
                                                         : UpdateClass::kDebasement;
}

std::string judge_tag(const std::string& scope, int turn) {
  return scope + "/judge/turn-" + std::to_string(turn);
}

nlohmann::json make_judge_response(const Rubric& rubric,
                                   const std::vector<Distribution>& posteriors,
                                   const std::vector<std::string>& justifications,
                                   const std::vector<UpdateClass>& classes) {
  nlohmann::json dims = nlohmann::json::array();
  for (std::size_t d = 0; d < rubric.num_dimensions(); ++d) {
    nlohmann::json item = {{"name", rubric.dimensions()[d].name},
                           {"probabilities", posteriors.at(d)},
                           {"justification",
                            d < justifications.size() ? justifications[d] : ""}};
    if (d < classes.size()) {
      item["classification"] = std::string(update_class_name(classes[d]));
    }
    dims.push_back(std::move(item));
  }
  return {{"dimensions", std::move(dims)}};
}

Judge::Judge(llm::Gateway& gateway, const PromptLibrary& prompts, JudgeOptions options)
    : gateway_(gateway), prompts_(prompts), options_(std::move(options)) {
  if (!(options_.epsilon >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "judge epsilon must be >= 0");
  }
}

llm::ModelRequest Judge::build_request(const Rubric& rubric, const Transcript& transcript,
                                       const BeliefState& prev, PolicyKind policy,
                                       const std::string& scope) const {
  const int turn = static_cast<int>(transcript.size());
  const auto t = transcript.size();
  std::map<std::string, std::string> slots;
  slots["rubric"] = render_rubric(rubric);
  slots["resume"] = transcript.resume_text();
  slots["output_format"] = output_format(rubric);

  const PromptTemplate* prompt = nullptr;
  if (policy == PolicyKind::kIndependent) {
    prompt = &prompts_.get("judge_independent");
    slots["transcript"] = render_turns(transcript, 0, t);
  } else {
    prompt = &prompts_.get("judge_pba");
    slots["previous_belief"] = render_belief(prev, rubric);
    if (t == 0) {
      slots["transcript"] = "(no interview turns yet)\n";
      slots["evidence_delta"] =
          "The resume above is the first evidence; update the uniform prior with it.\n";
    } else {
      slots["transcript"] = render_turns(transcript, 0, t - 1);
      slots["evidence_delta"] = render_turns(transcript, t - 1, t);
    }
  }

  llm::ModelRequest request;
  request.system_prompt = PromptTemplate::render(prompt->system(), slots);
  request.messages.push_back({"user", PromptTemplate::render(prompt->user(), slots)});
  request.schema_id = std::string(llm::kBeliefPosteriorsSchema);
  request.model_name = options_.model_name;
  request.effort = options_.effort;
  request.tag = judge_tag(scope, turn);
  request.scope = scope;
  const double epsilon = options_.epsilon;
  request.validator = [&rubric, &prev, epsilon](const nlohmann::json& value)
      -> std::optional<std::string> {
    try {
      parse_posteriors(value, rubric, prev, epsilon);
    } catch (const Error& e) {
      return std::string(e.what());
    } catch (const nlohmann::json::exception& e) {
      return std::string(e.what());
    }
    return std::nullopt;
  };
  return request;
}

JudgeResult Judge::run(const Rubric& rubric, const Transcript& transcript,
                       const BeliefState& prev, PolicyKind policy,
                       const std::string& scope) const {
  const auto response =
      gateway_.complete(build_request(rubric, transcript, prev, policy, scope));
  const auto parsed = parse_posteriors(response.parsed, rubric, prev, options_.epsilon);

  JudgeResult result;
  result.belief.turn = static_cast<int>(transcript.size());
  result.belief.posteriors = parsed.posteriors;
  for (std::size_t d = 0; d < rubric.num_dimensions(); ++d) {
    AuditEntry entry;
    entry.dimension = rubric.dimensions()[d].name;
    entry.before = prev.posteriors[d];
    entry.after = parsed.posteriors[d];
    entry.justification = parsed.justifications[d];
    entry.classification =
        parsed.classes[d].value_or(derive_classification(entry.before, entry.after,
                                                         options_.epsilon));
    result.audit.push_back(std::move(entry));
  }
  if (const auto problems = validate_belief(result.belief, rubric); !problems.empty()) {
    throw Error(ErrorCode::kSchemaViolation, "judge produced an invalid belief: " +
                                                 problems.front());
  }
  return result;
}

JudgeResult Judge::initialize(const Rubric& rubric, const std::string& resume_text,
                              PolicyKind policy, const std::string& scope) const {
  if (resume_text.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "resume text is empty");
  }
  return run(rubric, Transcript(resume_text), uniform_belief(rubric), policy, scope);
}

JudgeResult Judge::update(const Rubric& rubric, const Transcript& transcript,
                          const BeliefState& prev, PolicyKind policy,
                          const std::string& scope) const {
  const int t = static_cast<int>(transcript.size());
  if (t < 1) {
    throw Error(ErrorCode::kInvalidArgument, "update needs at least one interview turn");
  }
  if (prev.turn != t - 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "turn mismatch: previous belief is turn " + std::to_string(prev.turn) +
                    ", transcript has " + std::to_string(t) + " turns");
  }
  if (const auto problems = validate_belief(prev, rubric); !problems.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "previous belief invalid: " + problems.front());
  }
  return run(rubric, transcript, prev, policy, scope);
}

}  // namespace btr::judge

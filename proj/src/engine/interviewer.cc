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

#include "btr/interviewer.h"

#include <map>
#include <sstream>

#include "btr/error.h"
#include "btr/io.h"

namespace btr::interview {
namespace {

std::string prompt_id(InterviewerKind kind) {
  return "interviewer_" + std::string(interviewer_name(kind));
}

bool blank(const std::string& s) {
  return s.find_first_not_of(" \t\r\n") == std::string::npos;
}

std::string turn_tag(const std::string& scope, const char* role, int turn) {
  return scope + "/" + role + "/turn-" + std::to_string(turn);
}

}  // namespace

std::string_view interviewer_name(InterviewerKind kind) {
  switch (kind) {
    case InterviewerKind::kBeliefAware: return "belief_aware";
    case InterviewerKind::kBeliefUnaware: return "belief_unaware";
    case InterviewerKind::kRubricUnaware: return "rubric_unaware";
    case InterviewerKind::kShallowUnaware: return "shallow_unaware";
  }
  return "belief_unaware";
}

InterviewerKind parse_interviewer(std::string_view name) {
  for (auto kind : all_interviewers()) {
    if (interviewer_name(kind) == name) return kind;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown interviewer policy \"" + std::string(name) + "\"");
}

std::vector<InterviewerKind> all_interviewers() {
  return {InterviewerKind::kBeliefAware, InterviewerKind::kBeliefUnaware,
          InterviewerKind::kRubricUnaware, InterviewerKind::kShallowUnaware};
}

InterviewerInputs required_inputs(InterviewerKind kind) {
  switch (kind) {
    case InterviewerKind::kBeliefAware: return {true, true, true};
    case InterviewerKind::kBeliefUnaware: return {true, true, false};
    case InterviewerKind::kRubricUnaware:
    case InterviewerKind::kShallowUnaware: return {true, false, false};
  }
  return {};
}

std::string interviewer_tag(const std::string& scope, int turn) {
  return turn_tag(scope, "interviewer", turn);
}
std::string applicant_tag(const std::string& scope, int turn) {
  return turn_tag(scope, "applicant", turn);
}
std::string sanitizer_tag(const std::string& scope, int turn) {
  return turn_tag(scope, "sanitizer", turn);
}

Interviewer::Interviewer(llm::Gateway& gateway, const PromptLibrary& prompts,
                         InterviewerOptions options)
    : gateway_(gateway), prompts_(prompts), options_(std::move(options)) {}

llm::ModelRequest Interviewer::build_request(InterviewerKind kind,
                                             const Transcript& transcript,
                                             const Rubric* rubric,
                                             const BeliefState* prev_belief,
                                             const std::string& scope) const {
  const auto inputs = required_inputs(kind);
  const auto name = std::string(interviewer_name(kind));
  if (inputs.rubric != (rubric != nullptr)) {
    throw Error(ErrorCode::kInvalidArgument,
                name + (inputs.rubric ? " requires a rubric" : " must not receive a rubric"));
  }
  if (inputs.previous_belief != (prev_belief != nullptr)) {
    throw Error(ErrorCode::kInvalidArgument,
                name + (inputs.previous_belief ? " requires the previous belief"
                                               : " must not receive a belief"));
  }
  if (blank(transcript.resume_text())) {
    throw Error(ErrorCode::kInvalidArgument, "interviewer needs the resume");
  }

  std::map<std::string, std::string> slots;
  slots["resume"] = transcript.resume_text();
  slots["transcript"] = render_turns(transcript, 0, transcript.size());
  slots["policy_hook"] = options_.policy_hook;
  if (rubric) slots["rubric"] = render_rubric(*rubric);
  if (prev_belief) {
    if (const auto problems = validate_belief(*prev_belief, *rubric); !problems.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "interviewer got an invalid belief: " + problems.front());
    }
    slots["previous_belief"] = render_belief(*prev_belief, *rubric);
  }

  const auto& prompt = prompts_.get(prompt_id(kind));
  llm::ModelRequest request;
  request.system_prompt = PromptTemplate::render(prompt.system(), slots);
  request.messages.push_back({"user", PromptTemplate::render(prompt.user(), slots)});
  request.schema_id = std::string(llm::kInterviewerQuestionSchema);
  request.model_name = options_.model_name;
  request.effort = options_.effort;
  request.tag = interviewer_tag(scope, static_cast<int>(transcript.size()) + 1);
  request.scope = scope;
  return request;
}

std::string Interviewer::next_question(InterviewerKind kind, const Transcript& transcript,
                                       const Rubric* rubric, const BeliefState* prev_belief,
                                       const std::string& scope) const {
  const auto response =
      gateway_.complete(build_request(kind, transcript, rubric, prev_belief, scope));
  return response.parsed.at("question").get<std::string>();
}

void check_applicant_spec(const ApplicantSpec& spec) {
  if (spec.archetype.levels.size() != spec.rubric.num_dimensions()) {
    throw Error(ErrorCode::kInvalidArgument,
                "archetype " + spec.archetype.id + " has " +
                    std::to_string(spec.archetype.levels.size()) +
                    " levels for a rubric with D=" +
                    std::to_string(spec.rubric.num_dimensions()));
  }
  for (int level : spec.archetype.levels) {
    if (level < 1 || level > spec.rubric.num_levels()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "archetype " + spec.archetype.id + " has level " +
                      std::to_string(level) + " outside 1.." +
                      std::to_string(spec.rubric.num_levels()));
    }
  }
}

std::string render_archetype(const ApplicantSpec& spec) {
  check_applicant_spec(spec);
  std::ostringstream out;
  out << "Profile (" << spec.rubric.domain_name() << "):\n";
  for (std::size_t d = 0; d < spec.rubric.num_dimensions(); ++d) {
    const auto& dim = spec.rubric.dimensions()[d];
    const int level = spec.archetype.levels[d];
    out << "- " << dim.name << ": level " << level << " ("
        << spec.rubric.level(level).label << "): " << dim.anchor(level) << "\n";
  }
  return out.str();
}

Applicant::Applicant(llm::Gateway& gateway, const PromptLibrary& prompts,
                     ApplicantOptions options)
    : gateway_(gateway), prompts_(prompts), options_(std::move(options)) {}

std::string Applicant::guardrail_text(const GuardrailSet& guardrails) const {
  std::string out;
  const auto add = [&](bool on, const char* id) {
    if (!on) return;
    if (out.empty()) out = "Rules for your answers:\n";
    out += "- " + prompts_.get(id).user() + "\n";
  };
  add(guardrails.self_preservation, "guardrail_self_preservation");
  add(guardrails.show_dont_tell, "guardrail_show_dont_tell");
  add(guardrails.no_volunteered_evidence, "guardrail_no_volunteered_evidence");
  return out;
}

llm::ModelRequest Applicant::build_reply_request(const ApplicantSpec& spec,
                                                 const GuardrailSet& guardrails,
                                                 const std::string& question,
                                                 const Transcript& transcript,
                                                 const std::string& scope) const {
  if (blank(question)) {
    throw Error(ErrorCode::kInvalidArgument, "applicant got an empty question");
  }
  std::map<std::string, std::string> slots;
  slots["personality"] = spec.personality.empty() ? "neutral" : spec.personality;
  slots["archetype"] = render_archetype(spec);
  slots["guardrails"] = guardrail_text(guardrails);
  slots["resume"] = spec.resume_text;
  slots["transcript"] = render_turns(transcript, 0, transcript.size());
  slots["question"] = question;

  const auto& prompt = prompts_.get("applicant");
  llm::ModelRequest request;
  request.system_prompt = PromptTemplate::render(prompt.system(), slots);
  request.messages.push_back({"user", PromptTemplate::render(prompt.user(), slots)});
  request.schema_id = std::string(llm::kApplicantReplySchema);
  request.model_name = options_.model_name;
  request.effort = options_.effort;
  request.tag = applicant_tag(scope, static_cast<int>(transcript.size()) + 1);
  request.scope = scope;
  return request;
}

llm::ModelRequest Applicant::build_sanitize_request(const ApplicantSpec& spec,
                                                    const std::string& proposed_reply,
                                                    int turn,
                                                    const std::string& scope) const {
  if (blank(proposed_reply)) {
    throw Error(ErrorCode::kInvalidArgument, "nothing to sanitize");
  }
  std::map<std::string, std::string> slots;
  slots["archetype"] = render_archetype(spec);
  slots["proposed_reply"] = proposed_reply;

  const auto& prompt = prompts_.get("sanitizer");
  llm::ModelRequest request;
  request.system_prompt = PromptTemplate::render(prompt.system(), slots);
  request.messages.push_back({"user", PromptTemplate::render(prompt.user(), slots)});
  request.schema_id = std::string(llm::kSanitizedReplySchema);
  request.model_name = options_.model_name;
  request.effort = options_.effort;
  request.tag = sanitizer_tag(scope, turn);
  request.scope = scope;
  return request;
}

std::string Applicant::reply(const ApplicantSpec& spec, const GuardrailSet& guardrails,
                             const std::string& question, const Transcript& transcript,
                             const std::string& scope) const {
  const auto response = gateway_.complete(
      build_reply_request(spec, guardrails, question, transcript, scope));
  return response.parsed.at("reply").get<std::string>();
}

std::string Applicant::sanitize(const ApplicantSpec& spec, const std::string& proposed_reply,
                                int turn, const std::string& scope) const {
  const auto response =
      gateway_.complete(build_sanitize_request(spec, proposed_reply, turn, scope));
  return response.parsed.at("reply").get<std::string>();
}

std::vector<std::string> load_personalities(const std::filesystem::path& path) {
  auto lines = read_lines(path);
  if (lines.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "personality list " + path.string() + " is empty");
  }
  return lines;
}

}  // namespace btr::interview

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

#ifndef BTR_INTERVIEWER_H_
#define BTR_INTERVIEWER_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "btr/belief.h"
#include "btr/llm/gateway.h"
#include "btr/metrics.h"
#include "btr/prompts.h"
#include "btr/rubric.h"
#include "btr/transcript.h"

namespace btr::interview {

enum class InterviewerKind {
  kBeliefAware,
  kBeliefUnaware,
  kRubricUnaware,
  kShallowUnaware,
};

std::string_view interviewer_name(InterviewerKind kind);
InterviewerKind parse_interviewer(std::string_view name);
std::vector<InterviewerKind> all_interviewers();

// Which inputs a policy sees at turn t. The resume is always given.
struct InterviewerInputs {
  bool resume = true;
  bool rubric = false;
  bool previous_belief = false;
};

InterviewerInputs required_inputs(InterviewerKind kind);

struct InterviewerOptions {
  std::string model_name;
  llm::ReasoningEffort effort = llm::ReasoningEffort::kLow;
  // Extra system-prompt text, e.g. deployment rules about protected
  // attributes. Empty by default.
  std::string policy_hook;
};

class Interviewer {
 public:
  Interviewer(llm::Gateway& gateway, const PromptLibrary& prompts,
              InterviewerOptions options = {});

  // Question for turn transcript.size() + 1. rubric / prev_belief must be
  // non-null exactly when the policy's inputs include them; otherwise
  // Error(kInvalidArgument).
  std::string next_question(InterviewerKind kind, const Transcript& transcript,
                            const Rubric* rubric, const BeliefState* prev_belief,
                            const std::string& scope) const;

  llm::ModelRequest build_request(InterviewerKind kind, const Transcript& transcript,
                                  const Rubric* rubric, const BeliefState* prev_belief,
                                  const std::string& scope) const;

 private:
  llm::Gateway& gateway_;
  const PromptLibrary& prompts_;
  InterviewerOptions options_;
};

struct GuardrailSet {
  bool self_preservation = true;
  bool show_dont_tell = true;
  bool no_volunteered_evidence = true;
};

struct ApplicantSpec {
  std::string resume_text;
  metrics::ArchetypeProfile archetype;
  std::string personality;
  Rubric rubric;
};

// Throws Error(kInvalidArgument) if the archetype does not fit the rubric.
void check_applicant_spec(const ApplicantSpec& spec);

// "name: level k (label): anchor" per dimension.
std::string render_archetype(const ApplicantSpec& spec);

struct ApplicantOptions {
  std::string model_name;
  llm::ReasoningEffort effort = llm::ReasoningEffort::kLow;
};

// Simulated applicant: one call proposes a reply, a second call sanitizes it
// without seeing the question.
class Applicant {
 public:
  Applicant(llm::Gateway& gateway, const PromptLibrary& prompts,
            ApplicantOptions options = {});

  std::string reply(const ApplicantSpec& spec, const GuardrailSet& guardrails,
                    const std::string& question, const Transcript& transcript,
                    const std::string& scope) const;

  std::string sanitize(const ApplicantSpec& spec, const std::string& proposed_reply,
                       int turn, const std::string& scope) const;

  llm::ModelRequest build_reply_request(const ApplicantSpec& spec,
                                        const GuardrailSet& guardrails,
                                        const std::string& question,
                                        const Transcript& transcript,
                                        const std::string& scope) const;

  // Carries only the archetype/rubric context and the proposed reply.
  llm::ModelRequest build_sanitize_request(const ApplicantSpec& spec,
                                           const std::string& proposed_reply, int turn,
                                           const std::string& scope) const;

  std::string guardrail_text(const GuardrailSet& guardrails) const;

 private:
  llm::Gateway& gateway_;
  const PromptLibrary& prompts_;
  ApplicantOptions options_;
};

// Tags: "<scope>/<role>/turn-<t>" for role in interviewer, applicant, sanitizer.
std::string interviewer_tag(const std::string& scope, int turn);
std::string applicant_tag(const std::string& scope, int turn);
std::string sanitizer_tag(const std::string& scope, int turn);

// Plain text, one personality per line.
std::vector<std::string> load_personalities(const std::filesystem::path& path);

}  // namespace btr::interview

#endif  // BTR_INTERVIEWER_H_

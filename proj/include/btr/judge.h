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

#ifndef BTR_JUDGE_H_
#define BTR_JUDGE_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "btr/belief.h"
#include "btr/llm/gateway.h"
#include "btr/prompts.h"
#include "btr/rubric.h"
#include "btr/transcript.h"

namespace btr::judge {

// Shift threshold for what counts as a belief change.
inline constexpr double kDefaultEpsilon = 0.04;

// Independent rebuilds posteriors from the full evidence each turn.
// Previous-belief-aware (pba) also sees B_{t-1} and the evidence that
// arrived since, and updates it.
enum class PolicyKind { kIndependent, kPba };

std::string_view policy_name(PolicyKind kind);
PolicyKind parse_policy(std::string_view name);

struct JudgeOptions {
  double epsilon = kDefaultEpsilon;
  std::string model_name;
  llm::ReasoningEffort effort = llm::ReasoningEffort::kLow;
};

struct JudgeResult {
  BeliefState belief;
  std::vector<AuditEntry> audit;  // one entry per dimension, rubric order
};

// Clips negatives to 0 and divides by the sum. Throws
// Error(kSchemaViolation) if the sum is below 0.5 or a value is not finite.
Distribution renormalize(std::span<const double> raw);

// Direction-based classification used when the model does not supply one.
UpdateClass derive_classification(const Distribution& before,
                                  const Distribution& after, double epsilon);

class Judge {
 public:
  Judge(llm::Gateway& gateway, const PromptLibrary& prompts, JudgeOptions options = {});

  // Turn-0 belief from the resume. For pba the update is conditioned on the
  // uniform prior B_{-1}. Audit "before" is always the uniform prior.
  JudgeResult initialize(const Rubric& rubric, const std::string& resume_text,
                         PolicyKind policy, const std::string& scope) const;

  // Belief after turn t = transcript.size(). Requires prev.turn == t - 1.
  // Independent ignores prev except for turn numbering and audit "before".
  JudgeResult update(const Rubric& rubric, const Transcript& transcript,
                     const BeliefState& prev, PolicyKind policy,
                     const std::string& scope) const;

  // The request update()/initialize() would send; prompt-assembly tests use
  // it directly. turn == 0 builds the initialization request.
  llm::ModelRequest build_request(const Rubric& rubric, const Transcript& transcript,
                                  const BeliefState& prev, PolicyKind policy,
                                  const std::string& scope) const;

  const JudgeOptions& options() const { return options_; }

 private:
  JudgeResult run(const Rubric& rubric, const Transcript& transcript,
                  const BeliefState& prev, PolicyKind policy,
                  const std::string& scope) const;

  llm::Gateway& gateway_;
  const PromptLibrary& prompts_;
  JudgeOptions options_;
};

// Tag scheme shared with script builders: "<scope>/judge/turn-<t>".
std::string judge_tag(const std::string& scope, int turn);

// Structured response a judge model returns; used by script builders and
// test stubs.
nlohmann::json make_judge_response(const Rubric& rubric,
                                   const std::vector<Distribution>& posteriors,
                                   const std::vector<std::string>& justifications,
                                   const std::vector<UpdateClass>& classes = {});

}  // namespace btr::judge

#endif  // BTR_JUDGE_H_

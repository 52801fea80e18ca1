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

#include <filesystem>
#include <fstream>
#include <memory>
#include <string>

#include <gtest/gtest.h>

#include "btr/error.h"
#include "btr/prompts.h"
#include "test_support.h"

namespace btr::interview {
namespace {

using btr::testing::QueueBackend;

class InterviewerTest : public ::testing::Test {
 protected:
  InterviewerTest()
      : backend_(std::make_shared<QueueBackend>(std::vector<std::string>{
            R"({"question":"Tell me about d1."})", R"({"reply":"I built it."})",
            R"({"reply":"I helped build it."})"})),
        gateway_(backend_) {}

  ApplicantSpec spec() const {
    return {"RESUME-BODY", {"mixed", {1, 3}}, "terse and dry", rubric_};
  }

  Rubric rubric_ = btr::testing::make_lmh_rubric(2);
  PromptLibrary prompts_ = PromptLibrary::builtin();
  std::shared_ptr<QueueBackend> backend_;
  llm::Gateway gateway_;
};

TEST(InterviewerKindTest, NamesAndInputs) {
  for (auto kind : all_interviewers()) {
    EXPECT_EQ(parse_interviewer(interviewer_name(kind)), kind);
  }
  EXPECT_THROW(parse_interviewer("random"), Error);
  EXPECT_TRUE(required_inputs(InterviewerKind::kBeliefAware).previous_belief);
  EXPECT_TRUE(required_inputs(InterviewerKind::kBeliefUnaware).rubric);
  EXPECT_FALSE(required_inputs(InterviewerKind::kBeliefUnaware).previous_belief);
  EXPECT_FALSE(required_inputs(InterviewerKind::kRubricUnaware).rubric);
  EXPECT_FALSE(required_inputs(InterviewerKind::kShallowUnaware).rubric);
}

TEST_F(InterviewerTest, InputsAreGatedByPolicy) {
  Interviewer iv(gateway_, prompts_);
  Transcript t("resume");
  const BeliefState b = uniform_belief(rubric_);
  EXPECT_THROW(iv.build_request(InterviewerKind::kBeliefAware, t, &rubric_, nullptr, "s"), Error);
  EXPECT_THROW(iv.build_request(InterviewerKind::kBeliefUnaware, t, &rubric_, &b, "s"), Error);
  EXPECT_THROW(iv.build_request(InterviewerKind::kBeliefUnaware, t, nullptr, nullptr, "s"), Error);
  EXPECT_THROW(iv.build_request(InterviewerKind::kRubricUnaware, t, &rubric_, nullptr, "s"), Error);
  EXPECT_NO_THROW(iv.build_request(InterviewerKind::kBeliefAware, t, &rubric_, &b, "s"));
  EXPECT_NO_THROW(iv.build_request(InterviewerKind::kShallowUnaware, t, nullptr, nullptr, "s"));
  EXPECT_THROW(iv.build_request(InterviewerKind::kShallowUnaware, Transcript(""), nullptr,
                                nullptr, "s"),
               Error);
}

TEST_F(InterviewerTest, PromptsCarryOnlyPermittedInputs) {
  Interviewer iv(gateway_, prompts_);
  Transcript t("RESUME-BODY");
  t.append("Q-ONE", "A-ONE");
  BeliefState b = uniform_belief(rubric_);
  b.turn = 1;
  b.posteriors[0] = {0.125, 0.25, 0.625};
  const auto text = [](const llm::ModelRequest& r) {
    return r.system_prompt + "\n" + r.messages.at(0).content;
  };
  const auto aware = text(iv.build_request(InterviewerKind::kBeliefAware, t, &rubric_, &b, "s"));
  EXPECT_NE(aware.find("0.625"), std::string::npos);
  EXPECT_NE(aware.find("medium anchor"), std::string::npos);
  const auto unaware =
      text(iv.build_request(InterviewerKind::kBeliefUnaware, t, &rubric_, nullptr, "s"));
  EXPECT_EQ(unaware.find("0.625"), std::string::npos);
  EXPECT_NE(unaware.find("medium anchor"), std::string::npos);
  const auto blind =
      text(iv.build_request(InterviewerKind::kRubricUnaware, t, nullptr, nullptr, "s"));
  EXPECT_EQ(blind.find("medium anchor"), std::string::npos);
  EXPECT_NE(blind.find("A-ONE"), std::string::npos);
  EXPECT_NE(blind.find("RESUME-BODY"), std::string::npos);
  const auto shallow =
      text(iv.build_request(InterviewerKind::kShallowUnaware, t, nullptr, nullptr, "s"));
  EXPECT_NE(shallow.find("You are instructed to\nask shallow, open-ended questions."),
            std::string::npos);
  EXPECT_EQ(blind.find("shallow"), std::string::npos);
}

TEST_F(InterviewerTest, PolicyHookIsInjected) {
  Interviewer iv(gateway_, prompts_, InterviewerOptions{"", llm::ReasoningEffort::kLow,
                                                        "HOOK-TEXT: never ask about age."});
  const auto req =
      iv.build_request(InterviewerKind::kRubricUnaware, Transcript("r"), nullptr, nullptr, "s");
  EXPECT_NE(req.system_prompt.find("HOOK-TEXT"), std::string::npos);
}

TEST_F(InterviewerTest, QuestionTagIsNextTurn) {
  Interviewer iv(gateway_, prompts_);
  Transcript t("resume");
  t.append("q", "a");
  EXPECT_EQ(iv.next_question(InterviewerKind::kRubricUnaware, t, nullptr, nullptr, "p"),
            "Tell me about d1.");
  EXPECT_EQ(backend_->requests()[0].tag, "p/interviewer/turn-2");
  EXPECT_EQ(backend_->requests()[0].schema_id, llm::kInterviewerQuestionSchema);
}

TEST_F(InterviewerTest, ApplicantSpecMustFitRubric) {
  auto s = spec();
  EXPECT_NO_THROW(check_applicant_spec(s));
  s.archetype.levels = {1};
  EXPECT_THROW(check_applicant_spec(s), Error);
  s.archetype.levels = {1, 4};
  EXPECT_THROW(check_applicant_spec(s), Error);
  s.archetype.levels = {0, 2};
  EXPECT_THROW(check_applicant_spec(s), Error);
}

TEST_F(InterviewerTest, ArchetypeRenderingNamesLevelsAndAnchors) {
  const auto text = render_archetype(spec());
  EXPECT_NE(text.find("d1: level 1 (low): low anchor"), std::string::npos);
  EXPECT_NE(text.find("d2: level 3 (high): high anchor"), std::string::npos);
}

TEST_F(InterviewerTest, ApplicantReplyThenSanitizerWithoutQuestion) {
  Interviewer iv(gateway_, prompts_);
  Applicant applicant(gateway_, prompts_);
  Transcript t("RESUME-BODY");
  const auto q = iv.next_question(InterviewerKind::kRubricUnaware, t, nullptr, nullptr, "p");
  const auto proposed = applicant.reply(spec(), GuardrailSet{}, q, t, "p");
  EXPECT_EQ(proposed, "I built it.");
  const auto clean = applicant.sanitize(spec(), proposed, 1, "p");
  EXPECT_EQ(clean, "I helped build it.");

  const auto& reply_req = backend_->requests()[1];
  EXPECT_EQ(reply_req.tag, "p/applicant/turn-1");
  EXPECT_NE(reply_req.messages[0].content.find("Tell me about d1."), std::string::npos);
  const std::string reply_text = reply_req.system_prompt + reply_req.messages[0].content;
  EXPECT_NE(reply_text.find("terse and dry"), std::string::npos);
  EXPECT_NE(reply_text.find("RESUME-BODY"), std::string::npos);

  const auto& sanitize_req = backend_->requests()[2];
  EXPECT_EQ(sanitize_req.tag, "p/sanitizer/turn-1");
  EXPECT_EQ(sanitize_req.schema_id, llm::kSanitizedReplySchema);
  const std::string sanitize_text = sanitize_req.system_prompt + sanitize_req.messages[0].content;
  EXPECT_EQ(sanitize_text.find("Tell me about d1."), std::string::npos);
  EXPECT_EQ(sanitize_text.find("RESUME-BODY"), std::string::npos);
  EXPECT_NE(sanitize_text.find("I built it."), std::string::npos);
  EXPECT_NE(sanitize_text.find("d2: level 3"), std::string::npos);
}

TEST_F(InterviewerTest, GuardrailTextFollowsSwitches) {
  Applicant applicant(gateway_, prompts_);
  EXPECT_EQ(applicant.guardrail_text({false, false, false}), "");
  const auto all = applicant.guardrail_text({});
  EXPECT_NE(all.find("Self-preservation"), std::string::npos);
  EXPECT_NE(all.find("Show, don't tell"), std::string::npos);
  EXPECT_NE(all.find("No volunteered evidence"), std::string::npos);
  const auto one = applicant.guardrail_text({false, true, false});
  EXPECT_EQ(one.find("Self-preservation"), std::string::npos);
  EXPECT_NE(one.find("Show, don't tell"), std::string::npos);
}

TEST_F(InterviewerTest, EmptyInputsRejected) {
  Applicant applicant(gateway_, prompts_);
  EXPECT_THROW(applicant.build_reply_request(spec(), {}, " ", Transcript("r"), "s"), Error);
  EXPECT_THROW(applicant.build_sanitize_request(spec(), "", 1, "s"), Error);
}

TEST(TagTest, RoleTags) {
  EXPECT_EQ(interviewer_tag("a/b", 2), "a/b/interviewer/turn-2");
  EXPECT_EQ(applicant_tag("x", 1), "x/applicant/turn-1");
  EXPECT_EQ(sanitizer_tag("x", 12), "x/sanitizer/turn-12");
}

TEST(PersonalityTest, LoadsRepositoryList) {
  const auto list = load_personalities(std::filesystem::path(BTR_DATA_DIR) / "personalities.txt");
  EXPECT_GE(list.size(), 3u);
  btr::testing::TempDir dir("btr-personality");
  std::ofstream(dir.path() / "empty.txt") << "# only a comment\n\n";
  EXPECT_THROW(load_personalities(dir.path() / "empty.txt"), Error);
}

}  // namespace
}  // namespace btr::interview

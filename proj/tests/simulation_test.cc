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


#include "btr/simulation.h"

#include <filesystem>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "btr/error.h"
#include "btr/io.h"
#include "btr/llm/backends.h"
#include "btr/prompts.h"
#include "test_support.h"

namespace btr::sim {
namespace {

namespace fs = std::filesystem;
using btr::testing::small_sim_config;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// Every regular file under root, keyed by relative path.
std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path());
  }
  return out;
}

// Wildcard script: the judge always returns `belief`; the other roles
// always answer with fixed text.
std::shared_ptr<llm::ScriptedBackend> constant_script(const Rubric& rubric,
                                                      const std::vector<Distribution>& belief) {
  auto script = std::make_shared<llm::ScriptedBackend>();
  script->add(std::string(llm::kBeliefPosteriorsSchema), "*",
              judge::make_judge_response(rubric, belief,
                                         std::vector<std::string>(rubric.num_dimensions(), "same")));
  script->add(std::string(llm::kInterviewerQuestionSchema), "*", {{"question", "And then?"}});
  script->add(std::string(llm::kApplicantReplySchema), "*", {{"reply", "Then I shipped it."}});
  script->add(std::string(llm::kSanitizedReplySchema), "*", {{"reply", "Then we shipped it."}});
  return script;
}

class SimulationTest : public ::testing::Test {
 protected:
  PromptLibrary prompts_ = PromptLibrary::builtin();
};

TEST_F(SimulationTest, AnchorArchetypesAndArchetypeFiles) {
  const Rubric r = btr::testing::make_lmh_rubric(2);
  btr::testing::TempDir dir("btr-arch");
  const std::vector<metrics::ArchetypeProfile> list{{"mixed", {1, 3}}};
  write_text_file(dir.path() / "a.json", dump_pretty(archetypes_to_json(r.id(), list)));
  EXPECT_EQ(load_archetypes(dir.path() / "a.json", r), list);
  write_text_file(dir.path() / "bad.json",
                  R"({"rubric_id":"test_rubric","archetypes":[{"id":"x","levels":[1]}]})");
  EXPECT_THROW(load_archetypes(dir.path() / "bad.json", r), Error);
  write_text_file(dir.path() / "other.json",
                  R"({"rubric_id":"elsewhere","archetypes":[{"id":"x","levels":[1,1]}]})");
  EXPECT_THROW(load_archetypes(dir.path() / "other.json", r), Error);
}

TEST_F(SimulationTest, ProfilesEnumerateAndSampleDeterministically) {
  auto config = small_sim_config(2, 4);
  const auto all = enumerate_profiles(config);
  ASSERT_EQ(all.size(), 12u);
  EXPECT_EQ(all[0].id, "simr__cv-1__low-logan");
  EXPECT_EQ(enumerate_profiles(config)[5].personality, all[5].personality);
  const auto a = select_profiles(all, 5, 99);
  const auto b = select_profiles(all, 5, 99);
  ASSERT_EQ(a.size(), 5u);
  std::vector<std::string> ids_a, ids_b;
  for (const auto& p : a) ids_a.push_back(p.id);
  for (const auto& p : b) ids_b.push_back(p.id);
  EXPECT_EQ(ids_a, ids_b);
  std::set<std::string> unique(ids_a.begin(), ids_a.end());
  EXPECT_EQ(unique.size(), 5u);
  // Enumeration order is preserved.
  std::size_t last = 0;
  for (const auto& p : a) {
    std::size_t pos = 0;
    while (all[pos].id != p.id) ++pos;
    EXPECT_GE(pos, last);
    last = pos;
  }
  EXPECT_THROW(select_profiles(all, 13, 1), Error);
  config.profile_subset = 4;
  EXPECT_EQ(configured_profiles(config).size(), 4u);
}

TEST_F(SimulationTest, ConfigValidation) {
  auto config = small_sim_config(2);
  EXPECT_NO_THROW(validate_config(config));
  config.turns = 0;
  EXPECT_THROW(validate_config(config), Error);
  config = small_sim_config(2);
  config.rubrics[0].archetypes.push_back(config.rubrics[0].archetypes[0]);
  EXPECT_THROW(validate_config(config), Error);
  config = small_sim_config(2);
  config.rubrics[0].archetypes[0].levels = {1, 1};
  EXPECT_THROW(validate_config(config), Error);
  config = small_sim_config(2);
  config.rubrics[0].resumes.clear();
  EXPECT_THROW(validate_config(config), Error);
  config = small_sim_config(2);
  config.profile_subset = 4;
  EXPECT_THROW(validate_config(config), Error);
}

TEST_F(SimulationTest, LoadsRepositoryConfigs) {
  const auto small = load_simulation_config(fs::path(BTR_DATA_DIR) / "simulate_small.json");
  EXPECT_EQ(small.turns, 4);
  ASSERT_EQ(small.rubrics.size(), 1u);
  const auto& archetypes = small.rubrics[0].archetypes;
  ASSERT_GE(archetypes.size(), 3u);
  EXPECT_EQ(archetypes.back().id, "high-harley");
  EXPECT_FALSE(small.personalities.empty());
  const auto demo = load_simulation_config(fs::path(BTR_DATA_DIR) / "simulate_demo.json");
  EXPECT_EQ(demo.rubrics.size(), 3u);
  EXPECT_EQ(demo.turns, 12);
}

TEST_F(SimulationTest, TwoTurnRunLogsThreeStates) {
  const auto config = small_sim_config(2);
  const auto profiles = enumerate_profiles(config);
  llm::Gateway gateway(build_convergent_script(config, profiles));
  Agents agents(gateway, prompts_, config);
  const auto run = run_profile(config, profiles[0], agents, interview::InterviewerKind::kBeliefAware);
  ASSERT_FALSE(run.failed) << run.error;
  ASSERT_EQ(run.belief_log.size(), 3u);
  EXPECT_EQ(run.audit_log.size(), 3u);
  EXPECT_EQ(run.transcript.size(), 2u);
  EXPECT_EQ(run.shifts.size(), 2u);
  for (int t = 0; t <= 2; ++t) EXPECT_EQ(run.belief_log[t].turn, t);
  // The judge sees the sanitized reply, which the convergent script leaves
  // identical to the proposed one.
  EXPECT_NE(run.transcript.turns()[0].applicant_message.find("concrete example"), std::string::npos);
}

TEST_F(SimulationTest, ConvergentScriptShrinksShiftsGeometrically) {
  auto config = small_sim_config(6, 2);
  const auto profiles = enumerate_profiles(config);
  const ConvergentScriptOptions options{0.5, 0.8, {""}};
  llm::Gateway gateway(build_convergent_script(config, profiles, options));
  Agents agents(gateway, prompts_, config);
  const auto runs = run_profiles(config, profiles, agents, interview::InterviewerKind::kBeliefUnaware);
  std::vector<metrics::ShiftSeries> series;
  for (const auto& run : runs) {
    ASSERT_FALSE(run.failed) << run.error;
    ASSERT_EQ(run.shifts.size(), 6u);
    for (int t = 1; t < 6; ++t) {
      if (run.shifts[0] == 0.0) continue;
      EXPECT_LT(run.shifts[t], run.shifts[t - 1]);
      EXPECT_NEAR(run.shifts[t] / run.shifts[t - 1], options.rho, 1e-9);
    }
    series.push_back(run.shifts);
  }
  const auto curve = metrics::ctv_curve(series);
  for (std::size_t t = 2; t < curve.size(); ++t) {
    EXPECT_LT(curve[t] - curve[t - 1], curve[t - 1] - curve[t - 2]);
  }
  const auto summary = summarize(runs);
  for (std::size_t t = 1; t < summary.mean_shift.size(); ++t) {
    EXPECT_LT(summary.mean_shift[t], summary.mean_shift[t - 1]);
  }
}

TEST_F(SimulationTest, ConvergentFinalsRecoverEveryProfile) {
  auto config = small_sim_config(4, 2);
  const auto profiles = enumerate_profiles(config);
  llm::Gateway gateway(build_convergent_script(config, profiles));
  Agents agents(gateway, prompts_, config);
  const auto runs = run_profiles(config, profiles, agents, interview::InterviewerKind::kBeliefAware);
  const auto eval = evaluate_recovery(runs, {{"simr", config.rubrics[0].archetypes}});
  EXPECT_EQ(eval.final_turn, 4);
  EXPECT_DOUBLE_EQ(eval.final_pooled.recovery_rate, 1.0);
  // Resume-only beliefs sit on the middle level, which only average-jessie matches.
  EXPECT_DOUBLE_EQ(eval.initial_pooled.recovery_rate, 1.0 / 3.0);
  EXPECT_EQ(eval.initial_level_frequency, (std::vector<double>{0.0, 1.0, 0.0}));
}

TEST_F(SimulationTest, UniformFinalsRecoverOnlyLowLogan) {
  auto config = small_sim_config(2, 3);
  const Rubric& rubric = config.rubrics[0].rubric;
  llm::Gateway gateway(constant_script(rubric, uniform_belief(rubric).posteriors));
  Agents agents(gateway, prompts_, config);
  const auto runs = run_profiles(config, enumerate_profiles(config), agents,
                                 interview::InterviewerKind::kRubricUnaware);
  const auto eval = evaluate_recovery(runs, {{"simr", config.rubrics[0].archetypes}});
  long low = 0;
  for (const auto& run : runs) low += run.archetype.id == "low-logan";
  EXPECT_DOUBLE_EQ(eval.final_pooled.recovery_rate,
                   static_cast<double>(low) / static_cast<double>(runs.size()));
  for (const auto& [profile, predicted] : eval.final_by_rubric.at("simr").predictions) {
    EXPECT_EQ(predicted, "low-logan") << profile;
  }
}

TEST_F(SimulationTest, ConstantBeliefGivesZeroCtv) {
  auto config = small_sim_config(5, 2);
  const Rubric& rubric = config.rubrics[0].rubric;
  llm::Gateway gateway(constant_script(rubric, {{0.2, 0.3, 0.5}, {0.6, 0.2, 0.2}, {0.1, 0.8, 0.1}}));
  Agents agents(gateway, prompts_, config);
  btr::testing::TempDir dir("btr-zero");
  const auto curves = compare_interviewers(
      config, {interview::InterviewerKind::kBeliefAware, interview::InterviewerKind::kShallowUnaware},
      4, agents, dir.path());
  for (const auto& [policy, curve] : curves) {
    ASSERT_EQ(curve.size(), 5u);
    for (double v : curve) EXPECT_EQ(v, 0.0) << policy;
  }
}

TEST_F(SimulationTest, CompareUsesOneSubsetAcrossPolicies) {
  auto config = small_sim_config(4, 3, 21);
  const auto subset = select_profiles(enumerate_profiles(config), 5, config.seed);
  ConvergentScriptOptions options;
  options.scope_prefixes = {"belief_aware", "belief_unaware"};
  llm::Gateway gateway(build_convergent_script(config, subset, options));
  Agents agents(gateway, prompts_, config);
  btr::testing::TempDir dir("btr-compare");
  const auto curves = compare_interviewers(
      config, {interview::InterviewerKind::kBeliefAware, interview::InterviewerKind::kBeliefUnaware},
      5, agents, dir.path());
  ASSERT_EQ(curves.size(), 2u);
  const auto& a = curves.at("belief_aware");
  EXPECT_EQ(a, curves.at("belief_unaware"));
  for (std::size_t t = 1; t < a.size(); ++t) EXPECT_GE(a[t], a[t - 1]);
  const auto shifts = slurp(dir.path() / "shifts.csv");
  EXPECT_EQ(shifts.substr(0, shifts.find('\n')), "policy,profile_id,turn,delta");
  const auto ctv = slurp(dir.path() / "ctv.csv");
  EXPECT_NE(ctv.find("belief_unaware,4,"), std::string::npos);
  for (const auto& p : subset) {
    EXPECT_TRUE(fs::exists(dir.path() / "runs" / "belief_aware" / p.id / "belief_log.jsonl"));
  }
  EXPECT_THROW(compare_interviewers(config, {}, 5, agents, dir.path()), Error);
  EXPECT_THROW(compare_interviewers(config,
                                    {interview::InterviewerKind::kBeliefAware,
                                     interview::InterviewerKind::kBeliefAware},
                                    5, agents, dir.path()),
               Error);
}

TEST_F(SimulationTest, FailedProfileKeepsPartialLogAndIsExcluded) {
  auto config = small_sim_config(3, 1);
  const auto profiles = enumerate_profiles(config);
  const std::string victim = profiles[1].id;
  auto faulty = std::make_shared<btr::testing::FaultInjectingBackend>(
      build_convergent_script(config, profiles), [&](const llm::ModelRequest& r) {
        return r.tag == victim + "/judge/turn-2";
      });
  llm::Gateway gateway(faulty);
  Agents agents(gateway, prompts_, config);
  btr::testing::TempDir dir("btr-partial");
  const auto runs = simulate(config, agents, dir.path());
  ASSERT_EQ(runs.size(), 3u);
  EXPECT_TRUE(runs[1].failed);
  EXPECT_EQ(runs[1].belief_log.size(), 2u);
  EXPECT_EQ(runs[1].transcript.size(), 1u);
  EXPECT_NE(runs[1].error.find("upstream"), std::string::npos);
  EXPECT_FALSE(runs[0].failed);
  const auto summary = summarize(runs);
  EXPECT_EQ(summary.failed, 1);
  EXPECT_EQ(summary.failed_ids, std::vector<std::string>{victim});
  const auto eval = evaluate_recovery(runs, {{"simr", config.rubrics[0].archetypes}});
  EXPECT_EQ(eval.excluded_failed, 1);
  EXPECT_EQ(eval.final_pooled.total, 2);
  const auto reread = read_profile_run(dir.path() / "runs" / victim, {{"simr", config.rubrics[0].rubric}});
  EXPECT_TRUE(reread.failed);
  EXPECT_EQ(reread.belief_log.size(), 2u);
  EXPECT_EQ(slurp(dir.path() / "shifts.csv").find(victim), std::string::npos);
}

TEST_F(SimulationTest, CompletedRunWithoutFinalBeliefIsAnError) {
  auto config = small_sim_config(2);
  ProfileRun run;
  run.profile_id = "p";
  run.rubric_id = "simr";
  run.archetype = config.rubrics[0].archetypes[0];
  run.turns = 2;
  run.belief_log = {uniform_belief(config.rubrics[0].rubric)};
  EXPECT_THROW(evaluate_recovery({run}, {{"simr", config.rubrics[0].archetypes}}), Error);
}

TEST_F(SimulationTest, ScriptedSimulateIsByteIdenticalAcrossRuns) {
  auto config = small_sim_config(4, 2, 5);
  config.profile_subset = 3;
  const auto profiles = configured_profiles(config);
  btr::testing::TempDir a("btr-det-a");
  btr::testing::TempDir b("btr-det-b");
  for (const auto* dir : {&a, &b}) {
    llm::Gateway gateway(build_convergent_script(config, profiles));
    Agents agents(gateway, prompts_, config);
    simulate(config, agents, dir->path());
  }
  const auto ta = tree(a.path());
  const auto tb = tree(b.path());
  EXPECT_EQ(ta, tb);
  EXPECT_TRUE(ta.contains("recovery.json"));
  EXPECT_TRUE(ta.contains("ctv.csv"));
  EXPECT_EQ(ta.count("summary.json"), 1u);
}

TEST_F(SimulationTest, RecoverFromDirMatchesInMemoryEvaluation) {
  auto config = small_sim_config(3, 2);
  const auto profiles = enumerate_profiles(config);
  llm::Gateway gateway(build_convergent_script(config, profiles));
  Agents agents(gateway, prompts_, config);
  btr::testing::TempDir dir("btr-recover");
  const auto runs = simulate(config, agents, dir.path());
  const auto in_memory = evaluate_recovery(runs, {{"simr", config.rubrics[0].archetypes}});
  const auto reread = recover_from_dir(dir.path());
  EXPECT_EQ(recovery_evaluation_to_json(reread).dump(), recovery_evaluation_to_json(in_memory).dump());
  EXPECT_EQ(dump_pretty(recovery_evaluation_to_json(reread)), slurp(dir.path() / "recovery.json"));
  const auto run = read_profile_run(dir.path() / "runs" / runs[0].profile_id,
                                    {{"simr", config.rubrics[0].rubric}});
  EXPECT_EQ(run.belief_log, runs[0].belief_log);
  EXPECT_EQ(run.audit_log, runs[0].audit_log);
  EXPECT_EQ(run.transcript, runs[0].transcript);
  EXPECT_EQ(run.shifts, runs[0].shifts);
}

TEST_F(SimulationTest, ShiftCsvUsesRoundTripPrecision) {
  ProfileRun run;
  run.profile_id = "p";
  run.shifts = {0.1, 1.0 / 3.0};
  const auto csv = shifts_csv({run});
  EXPECT_NE(csv.find("p,2,0.33333333333333331"), std::string::npos);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "profile_id,turn,delta");
}

TEST_F(SimulationTest, ConvergentBeliefClosedForm) {
  const Rubric r = btr::testing::make_lmh_rubric(1);
  const metrics::ArchetypeProfile high{"high-harley", {3}};
  const auto b0 = convergent_belief(r, high, 0);
  EXPECT_DOUBLE_EQ(b0.posteriors[0][1], 0.5);
  EXPECT_DOUBLE_EQ(b0.posteriors[0][2], 0.25);
  const auto b2 = convergent_belief(r, high, 2);
  EXPECT_DOUBLE_EQ(b2.posteriors[0][2], 0.8 + (0.25 - 0.8) * 0.25);
  EXPECT_TRUE(validate_belief(b2, r).empty());
}

}  // namespace
}  // namespace btr::sim

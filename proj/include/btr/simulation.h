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

// End-to-end interview simulation over rubric x resume x archetype profiles.

#ifndef BTR_SIMULATION_H_
#define BTR_SIMULATION_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "btr/belief.h"
#include "btr/interviewer.h"
#include "btr/judge.h"
#include "btr/llm/backends.h"
#include "btr/llm/gateway.h"
#include "btr/metrics.h"
#include "btr/prompts.h"
#include "btr/rubric.h"
#include "btr/transcript.h"
#include "json.hpp"

namespace btr::sim {

inline constexpr int kDefaultTurns = 12;

// low-logan (all 1), average-jessie (all (L+1)/2), high-harley (all L).
std::vector<metrics::ArchetypeProfile> make_anchor_archetypes(const Rubric& rubric);

// {"rubric_id": "...", "archetypes": [{"id": "...", "levels": [..]}]}
std::vector<metrics::ArchetypeProfile> load_archetypes(const std::filesystem::path& path,
                                                       const Rubric& rubric);
nlohmann::ordered_json archetypes_to_json(const std::string& rubric_id,
                                          const std::vector<metrics::ArchetypeProfile>& list);

struct RubricEntry {
  Rubric rubric;
  std::map<std::string, std::string> resumes;  // id -> text, id order
  // Bespoke archetypes followed by the three anchors.
  std::vector<metrics::ArchetypeProfile> archetypes;
};

struct SimulationConfig {
  std::vector<RubricEntry> rubrics;
  interview::InterviewerKind interviewer = interview::InterviewerKind::kBeliefUnaware;
  judge::PolicyKind judge = judge::PolicyKind::kPba;
  int turns = kDefaultTurns;
  std::uint64_t seed = 0;
  std::vector<std::string> personalities;
  interview::GuardrailSet guardrails;
  // Seeded subset size; all profiles when unset.
  std::optional<int> profile_subset;
  int max_parallel = 4;
  std::string model_name;
  llm::ReasoningEffort effort = llm::ReasoningEffort::kLow;
  double epsilon = judge::kDefaultEpsilon;
  std::string policy_hook;
};

// Config file (paths relative to the file):
// {
//   "rubrics": [{"rubric": "rubrics/x.json", "resumes": "resumes/x",
//                "archetypes": "archetypes/x.json"}],
//   "interviewer": "belief_unaware", "judge": "pba", "turns": 12, "seed": 7,
//   "personalities": "personalities.txt", "guardrails": {...},
//   "profile_subset": 30, "max_parallel": 4, "model": "", "effort": "low"
// }
// "resumes" is a directory of *.txt (id = file stem) or a list of files.
SimulationConfig load_simulation_config(const std::filesystem::path& path);

// Throws Error(kInvalidArgument): T < 1, archetype/rubric mismatch, no
// resumes, duplicate rubric or archetype ids, bad subset size.
void validate_config(const SimulationConfig& config);

struct Profile {
  std::string id;  // "<rubric>__<resume>__<archetype>"
  std::size_t rubric_index = 0;
  std::string resume_id;
  metrics::ArchetypeProfile archetype;
  std::string personality;
};

// Full product in (rubric, resume, archetype) order; personalities drawn
// from the seed.
std::vector<Profile> enumerate_profiles(const SimulationConfig& config);

// Seeded sample of `count` profiles without replacement, returned in
// enumeration order.
std::vector<Profile> select_profiles(const std::vector<Profile>& all, int count,
                                     std::uint64_t seed);

// Profiles a run uses: the seeded subset if configured, else all.
std::vector<Profile> configured_profiles(const SimulationConfig& config);

struct ProfileRun {
  std::string profile_id;
  std::string rubric_id;
  std::string resume_id;
  metrics::ArchetypeProfile archetype;
  std::string personality;
  std::string interviewer;
  std::string judge;
  int turns = 0;
  Transcript transcript;
  std::vector<BeliefState> belief_log;              // turns 0..T
  std::vector<std::vector<AuditEntry>> audit_log;   // parallel to belief_log
  metrics::ShiftSeries shifts;                      // length T when complete
  bool failed = false;
  std::string error;
};

// Judge, interviewer and applicant sharing one gateway.
class Agents {
 public:
  Agents(llm::Gateway& gateway, const PromptLibrary& prompts, const SimulationConfig& config);

  const judge::Judge& judge() const { return judge_; }
  const interview::Interviewer& interviewer() const { return interviewer_; }
  const interview::Applicant& applicant() const { return applicant_; }

 private:
  judge::Judge judge_;
  interview::Interviewer interviewer_;
  interview::Applicant applicant_;
};

// Initialize at turn 0, then T rounds of question, reply, sanitize, update.
// The judge sees the sanitized reply. A failing call marks the run failed
// and keeps what was logged so far. Scope is `scope_prefix/profile id` (or
// just the profile id when the prefix is empty).
ProfileRun run_profile(const SimulationConfig& config, const Profile& profile,
                       const Agents& agents, interview::InterviewerKind interviewer,
                       const std::string& scope_prefix = "");

// Runs profiles on up to config.max_parallel threads; results in input order.
std::vector<ProfileRun> run_profiles(const SimulationConfig& config,
                                     const std::vector<Profile>& profiles,
                                     const Agents& agents,
                                     interview::InterviewerKind interviewer,
                                     const std::string& scope_prefix = "");

// runs/<id>/{profile.json, transcript.json, belief_log.jsonl, audit.jsonl}
void write_profile_run(const ProfileRun& run, const Rubric& rubric,
                       const std::filesystem::path& dir);
ProfileRun read_profile_run(const std::filesystem::path& dir,
                            const std::map<std::string, Rubric>& rubrics);

struct RecoveryEvaluation {
  int final_turn = 0;
  std::map<std::string, metrics::RecoveryReport> final_by_rubric;
  metrics::RecoveryReport final_pooled;
  std::map<std::string, metrics::RecoveryReport> initial_by_rubric;
  metrics::RecoveryReport initial_pooled;
  std::vector<double> initial_level_frequency;
  long excluded_failed = 0;
};

// Recovery at the final turn and at turn 0. Failed runs are excluded and
// counted; a completed run without a final belief is an error.
RecoveryEvaluation evaluate_recovery(
    const std::vector<ProfileRun>& runs,
    const std::map<std::string, std::vector<metrics::ArchetypeProfile>>& archetypes);

nlohmann::ordered_json recovery_evaluation_to_json(const RecoveryEvaluation& eval);

// "profile_id,turn,delta" for completed runs.
std::string shifts_csv(const std::vector<ProfileRun>& runs);
// "policy,turn,ctv" for each policy's completed runs.
std::string ctv_csv(const std::map<std::string, std::vector<ProfileRun>>& by_policy,
                    const std::vector<std::string>& order);

struct SimulationSummary {
  long profiles = 0;
  long completed = 0;
  long failed = 0;
  std::vector<std::string> failed_ids;
  std::vector<double> mean_shift;  // mean Delta_t over completed runs
};

SimulationSummary summarize(const std::vector<ProfileRun>& runs);

// Runs the configured profiles and writes the full output tree:
//   runs/<id>/..., shifts.csv, ctv.csv, recovery.json, summary.json,
//   rubrics/<id>.json, archetypes/<id>.json
std::vector<ProfileRun> simulate(const SimulationConfig& config, const Agents& agents,
                                 const std::filesystem::path& out_dir);

// CTV per policy over the same seeded subset of `subset` profiles. Writes
// runs/<policy>/<id>/..., shifts.csv and ctv.csv. Returns CTV_1..T per policy.
std::map<std::string, std::vector<double>> compare_interviewers(
    const SimulationConfig& config, const std::vector<interview::InterviewerKind>& policies,
    int subset, const Agents& agents, const std::filesystem::path& out_dir);

// Re-reads a simulate output tree and recomputes recovery.
RecoveryEvaluation recover_from_dir(const std::filesystem::path& out_dir);

struct ConvergentScriptOptions {
  double rho = 0.5;   // shift ratio between successive turns
  double peak = 0.8;  // target mass on the true level
  // Scope prefixes to script (e.g. interviewer policy names for compare);
  // one empty prefix scripts plain simulate runs.
  std::vector<std::string> scope_prefixes{""};
};

// Scripted responses under which every profile's belief moves geometrically
// from a resume-only state centred on the middle level towards a peak on the
// archetype's true level: b_t = target + (b_0 - target) * rho^t.
std::shared_ptr<llm::ScriptedBackend> build_convergent_script(
    const SimulationConfig& config, const std::vector<Profile>& profiles,
    const ConvergentScriptOptions& options = {});

// The belief the convergent script emits for a profile at turn t.
BeliefState convergent_belief(const Rubric& rubric, const metrics::ArchetypeProfile& truth,
                              int turn, const ConvergentScriptOptions& options = {});

}  // namespace btr::sim

#endif  // BTR_SIMULATION_H_

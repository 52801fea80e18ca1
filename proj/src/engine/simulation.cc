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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "btr/error.h"
#include "btr/io.h"

namespace btr::sim {
namespace {

[[noreturn]] void invalid(const std::string& message) {
  throw Error(ErrorCode::kInvalidArgument, message);
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::map<std::string, std::string> load_resumes(const std::filesystem::path& base,
                                                const nlohmann::json& spec) {
  std::vector<std::filesystem::path> files;
  if (spec.is_string()) {
    const auto dir = resolve(base, spec.get<std::string>());
    if (!std::filesystem::is_directory(dir)) {
      throw Error(ErrorCode::kIo, "resume directory " + dir.string() + " not found");
    }
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      if (entry.path().extension() == ".txt") files.push_back(entry.path());
    }
  } else {
    for (const auto& f : spec) files.push_back(resolve(base, f.get<std::string>()));
  }
  std::sort(files.begin(), files.end());
  std::map<std::string, std::string> out;
  for (const auto& f : files) {
    const auto id = f.stem().string();
    if (!out.emplace(id, read_text_file(f)).second) invalid("duplicate resume id " + id);
  }
  return out;
}

std::string scope_for(const std::string& prefix, const std::string& id) {
  return prefix.empty() ? id : prefix + "/" + id;
}

nlohmann::ordered_json profile_json(const ProfileRun& run) {
  nlohmann::ordered_json j;
  j["profile_id"] = run.profile_id;
  j["rubric_id"] = run.rubric_id;
  j["resume_id"] = run.resume_id;
  j["archetype_id"] = run.archetype.id;
  j["archetype_levels"] = run.archetype.levels;
  j["personality"] = run.personality;
  j["interviewer"] = run.interviewer;
  j["judge"] = run.judge;
  j["turns"] = run.turns;
  j["status"] = run.failed ? "failed" : "complete";
  j["error"] = run.error;
  return j;
}

template <typename Fn>
void parallel_for(std::size_t n, int max_parallel, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) fn(i);
  };
  const auto threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, max_parallel)), n);
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

std::map<std::string, std::vector<metrics::ArchetypeProfile>> archetypes_by_rubric(
    const SimulationConfig& config) {
  std::map<std::string, std::vector<metrics::ArchetypeProfile>> out;
  for (const auto& entry : config.rubrics) out[entry.rubric.id()] = entry.archetypes;
  return out;
}

const RubricEntry& rubric_entry(const SimulationConfig& config, const std::string& id) {
  for (const auto& e : config.rubrics) {
    if (e.rubric.id() == id) return e;
  }
  throw Error(ErrorCode::kNotFound, "unknown rubric " + id);
}

}  // namespace

std::vector<metrics::ArchetypeProfile> make_anchor_archetypes(const Rubric& rubric) {
  const auto d = rubric.num_dimensions();
  const int l = rubric.num_levels();
  return {
      {"low-logan", std::vector<int>(d, 1)},
      {"average-jessie", std::vector<int>(d, (l + 1) / 2)},
      {"high-harley", std::vector<int>(d, l)},
  };
}

std::vector<metrics::ArchetypeProfile> load_archetypes(const std::filesystem::path& path,
                                                       const Rubric& rubric) {
  const auto j = read_json_file(path);
  std::vector<metrics::ArchetypeProfile> out;
  try {
    if (j.contains("rubric_id") && j.at("rubric_id").get<std::string>() != rubric.id()) {
      invalid(path.string() + " is for rubric " + j.at("rubric_id").get<std::string>() +
              ", not " + rubric.id());
    }
    for (const auto& a : j.at("archetypes")) {
      metrics::ArchetypeProfile profile{a.at("id").get<std::string>(),
                                        a.at("levels").get<std::vector<int>>()};
      interview::check_applicant_spec({"", profile, "", rubric});
      out.push_back(std::move(profile));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
  return out;
}

nlohmann::ordered_json archetypes_to_json(const std::string& rubric_id,
                                          const std::vector<metrics::ArchetypeProfile>& list) {
  nlohmann::ordered_json j;
  j["rubric_id"] = rubric_id;
  j["archetypes"] = nlohmann::ordered_json::array();
  for (const auto& a : list) {
    nlohmann::ordered_json item;
    item["id"] = a.id;
    item["levels"] = a.levels;
    j["archetypes"].push_back(std::move(item));
  }
  return j;
}

SimulationConfig load_simulation_config(const std::filesystem::path& path) {
  const auto j = read_json_file(path);
  const auto base = path.parent_path();
  SimulationConfig config;
  try {
    for (const auto& r : j.at("rubrics")) {
      RubricEntry entry;
      entry.rubric = load_rubric_file(resolve(base, r.at("rubric").get<std::string>()).string());
      entry.resumes = load_resumes(base, r.at("resumes"));
      if (r.contains("archetypes")) {
        entry.archetypes =
            load_archetypes(resolve(base, r.at("archetypes").get<std::string>()), entry.rubric);
      }
      for (auto& a : make_anchor_archetypes(entry.rubric)) entry.archetypes.push_back(std::move(a));
      config.rubrics.push_back(std::move(entry));
    }
    config.interviewer =
        interview::parse_interviewer(j.value("interviewer", std::string("belief_unaware")));
    config.judge = judge::parse_policy(j.value("judge", std::string("pba")));
    config.turns = j.value("turns", kDefaultTurns);
    config.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("personalities")) {
      config.personalities = interview::load_personalities(
          resolve(base, j.at("personalities").get<std::string>()));
    }
    if (j.contains("guardrails")) {
      const auto& g = j.at("guardrails");
      config.guardrails.self_preservation = g.value("self_preservation", true);
      config.guardrails.show_dont_tell = g.value("show_dont_tell", true);
      config.guardrails.no_volunteered_evidence = g.value("no_volunteered_evidence", true);
    }
    if (j.contains("profile_subset") && !j.at("profile_subset").is_null()) {
      config.profile_subset = j.at("profile_subset").get<int>();
    }
    config.max_parallel = j.value("max_parallel", 4);
    config.model_name = j.value("model", std::string());
    config.effort = llm::parse_effort(j.value("effort", std::string("low")));
    config.epsilon = j.value("epsilon", judge::kDefaultEpsilon);
    config.policy_hook = j.value("policy_hook", std::string());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
  validate_config(config);
  return config;
}

void validate_config(const SimulationConfig& config) {
  if (config.turns < 1) invalid("turns must be >= 1");
  if (config.rubrics.empty()) invalid("config has no rubrics");
  if (config.max_parallel < 1) invalid("max_parallel must be >= 1");
  std::set<std::string> rubric_ids;
  std::size_t total = 0;
  for (const auto& entry : config.rubrics) {
    const auto& rubric = entry.rubric;
    if (!rubric_ids.insert(rubric.id()).second) invalid("duplicate rubric " + rubric.id());
    if (entry.resumes.empty()) invalid("rubric " + rubric.id() + " has no resumes");
    std::set<std::string> ids;
    for (const auto& a : entry.archetypes) {
      if (!ids.insert(a.id).second) {
        invalid("rubric " + rubric.id() + ": duplicate archetype " + a.id);
      }
      if (a.levels.size() != rubric.num_dimensions()) {
        invalid("archetype " + a.id + " has " + std::to_string(a.levels.size()) +
                " levels, rubric " + rubric.id() + " has D=" +
                std::to_string(rubric.num_dimensions()));
      }
      for (int level : a.levels) {
        if (level < 1 || level > rubric.num_levels()) {
          invalid("archetype " + a.id + " level " + std::to_string(level) + " out of range");
        }
      }
    }
    total += entry.resumes.size() * entry.archetypes.size();
  }
  if (config.profile_subset &&
      (*config.profile_subset < 1 || static_cast<std::size_t>(*config.profile_subset) > total)) {
    invalid("profile_subset " + std::to_string(*config.profile_subset) + " not in 1.." +
            std::to_string(total));
  }
}

std::vector<Profile> enumerate_profiles(const SimulationConfig& config) {
  std::mt19937_64 rng(config.seed);
  std::vector<Profile> out;
  for (std::size_t r = 0; r < config.rubrics.size(); ++r) {
    const auto& entry = config.rubrics[r];
    for (const auto& [resume_id, _] : entry.resumes) {
      for (const auto& archetype : entry.archetypes) {
        Profile p;
        p.id = entry.rubric.id() + "__" + resume_id + "__" + archetype.id;
        p.rubric_index = r;
        p.resume_id = resume_id;
        p.archetype = archetype;
        if (!config.personalities.empty()) {
          p.personality = config.personalities[rng() % config.personalities.size()];
        }
        out.push_back(std::move(p));
      }
    }
  }
  return out;
}

std::vector<Profile> select_profiles(const std::vector<Profile>& all, int count,
                                     std::uint64_t seed) {
  if (count < 0 || static_cast<std::size_t>(count) > all.size()) {
    invalid("cannot select " + std::to_string(count) + " of " + std::to_string(all.size()) +
            " profiles");
  }
  std::vector<std::size_t> order(all.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng() % i]);
  }
  order.resize(static_cast<std::size_t>(count));
  std::sort(order.begin(), order.end());
  std::vector<Profile> out;
  for (auto i : order) out.push_back(all[i]);
  return out;
}

std::vector<Profile> configured_profiles(const SimulationConfig& config) {
  auto all = enumerate_profiles(config);
  if (!config.profile_subset) return all;
  return select_profiles(all, *config.profile_subset, config.seed);
}

Agents::Agents(llm::Gateway& gateway, const PromptLibrary& prompts,
               const SimulationConfig& config)
    : judge_(gateway, prompts, judge::JudgeOptions{config.epsilon, config.model_name, config.effort}),
      interviewer_(gateway, prompts,
                   interview::InterviewerOptions{config.model_name, config.effort,
                                                 config.policy_hook}),
      applicant_(gateway, prompts, interview::ApplicantOptions{config.model_name, config.effort}) {}

ProfileRun run_profile(const SimulationConfig& config, const Profile& profile,
                       const Agents& agents, interview::InterviewerKind interviewer,
                       const std::string& scope_prefix) {
  if (profile.rubric_index >= config.rubrics.size()) invalid("profile rubric out of range");
  const auto& entry = config.rubrics[profile.rubric_index];
  const auto& rubric = entry.rubric;
  const auto resume_it = entry.resumes.find(profile.resume_id);
  if (resume_it == entry.resumes.end()) invalid("unknown resume " + profile.resume_id);

  ProfileRun run;
  run.profile_id = profile.id;
  run.rubric_id = rubric.id();
  run.resume_id = profile.resume_id;
  run.archetype = profile.archetype;
  run.personality = profile.personality;
  run.interviewer = std::string(interview::interviewer_name(interviewer));
  run.judge = std::string(judge::policy_name(config.judge));
  run.turns = config.turns;
  run.transcript = Transcript(resume_it->second);

  const interview::ApplicantSpec spec{resume_it->second, profile.archetype, profile.personality,
                                      rubric};
  interview::check_applicant_spec(spec);
  const auto inputs = interview::required_inputs(interviewer);
  const std::string scope = scope_for(scope_prefix, profile.id);

  try {
    auto init = agents.judge().initialize(rubric, resume_it->second, config.judge, scope);
    run.belief_log.push_back(std::move(init.belief));
    run.audit_log.push_back(std::move(init.audit));
    for (int t = 1; t <= config.turns; ++t) {
      const auto question = agents.interviewer().next_question(
          interviewer, run.transcript, inputs.rubric ? &rubric : nullptr,
          inputs.previous_belief ? &run.belief_log.back() : nullptr, scope);
      const auto proposed = agents.applicant().reply(spec, config.guardrails, question,
                                                     run.transcript, scope);
      const auto sanitized = agents.applicant().sanitize(spec, proposed, t, scope);
      Transcript next = run.transcript;
      next.append(question, sanitized);
      auto update = agents.judge().update(rubric, next, run.belief_log.back(), config.judge, scope);
      run.transcript = std::move(next);
      run.belief_log.push_back(std::move(update.belief));
      run.audit_log.push_back(std::move(update.audit));
    }
  } catch (const Error& e) {
    run.failed = true;
    run.error = std::string(error_code_name(e.code())) + ": " + e.what();
  }
  if (run.belief_log.size() > 1) run.shifts = metrics::shift_series(run.belief_log);
  return run;
}

std::vector<ProfileRun> run_profiles(const SimulationConfig& config,
                                     const std::vector<Profile>& profiles, const Agents& agents,
                                     interview::InterviewerKind interviewer,
                                     const std::string& scope_prefix) {
  std::vector<ProfileRun> runs(profiles.size());
  parallel_for(profiles.size(), config.max_parallel, [&](std::size_t i) {
    runs[i] = run_profile(config, profiles[i], agents, interviewer, scope_prefix);
  });
  return runs;
}

void write_profile_run(const ProfileRun& run, const Rubric& rubric,
                       const std::filesystem::path& dir) {
  write_text_file(dir / "profile.json", dump_pretty(profile_json(run)));
  write_text_file(dir / "transcript.json", dump_pretty(transcript_to_json(run.transcript)));
  std::string beliefs;
  std::string audits;
  for (std::size_t i = 0; i < run.belief_log.size(); ++i) {
    auto record = belief_record_to_json(run.belief_log[i], {}, rubric);
    record.erase("audit");
    beliefs += record.dump() + "\n";
    nlohmann::ordered_json line;
    line["turn"] = run.belief_log[i].turn;
    line["entries"] = nlohmann::ordered_json::array();
    for (const auto& e : run.audit_log[i]) line["entries"].push_back(audit_entry_to_json(e));
    audits += line.dump() + "\n";
  }
  write_text_file(dir / "belief_log.jsonl", beliefs);
  write_text_file(dir / "audit.jsonl", audits);
}

ProfileRun read_profile_run(const std::filesystem::path& dir,
                            const std::map<std::string, Rubric>& rubrics) {
  const auto profile = read_json_file(dir / "profile.json");
  ProfileRun run;
  try {
    run.profile_id = profile.at("profile_id").get<std::string>();
    run.rubric_id = profile.at("rubric_id").get<std::string>();
    run.resume_id = profile.at("resume_id").get<std::string>();
    run.archetype.id = profile.at("archetype_id").get<std::string>();
    run.archetype.levels = profile.at("archetype_levels").get<std::vector<int>>();
    run.personality = profile.value("personality", std::string());
    run.interviewer = profile.value("interviewer", std::string());
    run.judge = profile.value("judge", std::string());
    run.turns = profile.at("turns").get<int>();
    run.failed = profile.value("status", std::string("complete")) != "complete";
    run.error = profile.value("error", std::string());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, (dir / "profile.json").string() + ": " + e.what());
  }
  const auto rubric_it = rubrics.find(run.rubric_id);
  if (rubric_it == rubrics.end()) {
    throw Error(ErrorCode::kNotFound, "run " + run.profile_id + " uses unknown rubric " +
                                          run.rubric_id);
  }
  run.transcript = transcript_from_json(read_json_file(dir / "transcript.json"));
  for (const auto& line : read_jsonl_file(dir / "belief_log.jsonl")) {
    run.belief_log.push_back(belief_record_from_json(line, rubric_it->second).belief);
  }
  for (const auto& line : read_jsonl_file(dir / "audit.jsonl")) {
    std::vector<AuditEntry> entries;
    for (const auto& e : line.at("entries")) entries.push_back(audit_entry_from_json(e));
    run.audit_log.push_back(std::move(entries));
  }
  if (run.belief_log.size() > 1) run.shifts = metrics::shift_series(run.belief_log);
  return run;
}

RecoveryEvaluation evaluate_recovery(
    const std::vector<ProfileRun>& runs,
    const std::map<std::string, std::vector<metrics::ArchetypeProfile>>& archetypes) {
  RecoveryEvaluation eval;
  std::map<std::string, std::map<std::string, BeliefState>> finals;
  std::map<std::string, std::map<std::string, BeliefState>> initials;
  std::map<std::string, std::map<std::string, metrics::ArchetypeProfile>> truths;
  std::vector<BeliefState> initial_states;
  std::optional<int> final_turn;
  for (const auto& run : runs) {
    if (run.failed) {
      eval.excluded_failed += 1;
      continue;
    }
    if (run.belief_log.size() != static_cast<std::size_t>(run.turns) + 1) {
      invalid("run " + run.profile_id + " has no final belief (log length " +
              std::to_string(run.belief_log.size()) + ", T=" + std::to_string(run.turns) + ")");
    }
    if (final_turn && *final_turn != run.turns) invalid("runs disagree on T");
    final_turn = run.turns;
    if (!archetypes.contains(run.rubric_id)) {
      throw Error(ErrorCode::kNotFound, "no archetypes for rubric " + run.rubric_id);
    }
    finals[run.rubric_id][run.profile_id] = run.belief_log.back();
    initials[run.rubric_id][run.profile_id] = run.belief_log.front();
    truths[run.rubric_id][run.profile_id] = run.archetype;
    initial_states.push_back(run.belief_log.front());
  }
  eval.final_turn = final_turn.value_or(0);
  for (const auto& [rubric_id, beliefs] : finals) {
    const auto& list = archetypes.at(rubric_id);
    eval.final_by_rubric[rubric_id] = metrics::recovery_report(beliefs, truths[rubric_id], list);
    eval.initial_by_rubric[rubric_id] =
        metrics::recovery_report(initials[rubric_id], truths[rubric_id], list);
  }
  if (!finals.empty()) {
    eval.final_pooled = metrics::pool_reports(eval.final_by_rubric);
    eval.initial_pooled = metrics::pool_reports(eval.initial_by_rubric);
    eval.initial_level_frequency = metrics::level_frequency(initial_states);
  }
  return eval;
}

nlohmann::ordered_json recovery_evaluation_to_json(const RecoveryEvaluation& eval) {
  nlohmann::ordered_json j;
  j["final_turn"] = eval.final_turn;
  j["excluded_failed"] = eval.excluded_failed;
  const auto block = [](const std::map<std::string, metrics::RecoveryReport>& by_rubric,
                        const metrics::RecoveryReport& pooled) {
    nlohmann::ordered_json b;
    b["pooled"] = metrics::recovery_report_to_json(pooled);
    b["by_rubric"] = nlohmann::ordered_json::object();
    for (const auto& [id, report] : by_rubric) {
      b["by_rubric"][id] = metrics::recovery_report_to_json(report);
    }
    return b;
  };
  j["final"] = block(eval.final_by_rubric, eval.final_pooled);
  j["resume_only"] = block(eval.initial_by_rubric, eval.initial_pooled);
  j["resume_only"]["level_frequency"] = eval.initial_level_frequency;
  return j;
}

std::string shifts_csv(const std::vector<ProfileRun>& runs) {
  std::string out = "profile_id,turn,delta\n";
  for (const auto& run : runs) {
    if (run.failed) continue;
    for (std::size_t t = 0; t < run.shifts.size(); ++t) {
      out += run.profile_id + "," + std::to_string(t + 1) + "," + fmt_double(run.shifts[t]) + "\n";
    }
  }
  return out;
}

std::string ctv_csv(const std::map<std::string, std::vector<ProfileRun>>& by_policy,
                    const std::vector<std::string>& order) {
  std::string out = "policy,turn,ctv\n";
  for (const auto& policy : order) {
    std::vector<metrics::ShiftSeries> series;
    for (const auto& run : by_policy.at(policy)) {
      if (!run.failed) series.push_back(run.shifts);
    }
    if (series.empty()) continue;
    const auto curve = metrics::ctv_curve(series);
    for (std::size_t t = 0; t < curve.size(); ++t) {
      out += policy + "," + std::to_string(t + 1) + "," + fmt_double(curve[t]) + "\n";
    }
  }
  return out;
}

SimulationSummary summarize(const std::vector<ProfileRun>& runs) {
  SimulationSummary s;
  std::vector<double> sums;
  for (const auto& run : runs) {
    s.profiles += 1;
    if (run.failed) {
      s.failed += 1;
      s.failed_ids.push_back(run.profile_id);
      continue;
    }
    s.completed += 1;
    if (sums.size() < run.shifts.size()) sums.resize(run.shifts.size(), 0.0);
    for (std::size_t t = 0; t < run.shifts.size(); ++t) sums[t] += run.shifts[t];
  }
  for (double v : sums) s.mean_shift.push_back(s.completed ? v / static_cast<double>(s.completed) : 0.0);
  return s;
}

std::vector<ProfileRun> simulate(const SimulationConfig& config, const Agents& agents,
                                 const std::filesystem::path& out_dir) {
  validate_config(config);
  const auto profiles = configured_profiles(config);
  auto runs = run_profiles(config, profiles, agents, config.interviewer);

  for (const auto& run : runs) {
    write_profile_run(run, rubric_entry(config, run.rubric_id).rubric,
                      out_dir / "runs" / run.profile_id);
  }
  for (const auto& entry : config.rubrics) {
    write_text_file(out_dir / "rubrics" / (entry.rubric.id() + ".json"),
                    serialize_rubric(entry.rubric));
    write_text_file(out_dir / "archetypes" / (entry.rubric.id() + ".json"),
                    dump_pretty(archetypes_to_json(entry.rubric.id(), entry.archetypes)));
  }
  const std::string policy(interview::interviewer_name(config.interviewer));
  write_text_file(out_dir / "shifts.csv", shifts_csv(runs));
  write_text_file(out_dir / "ctv.csv", ctv_csv({{policy, runs}}, {policy}));
  write_text_file(out_dir / "recovery.json",
                  dump_pretty(recovery_evaluation_to_json(
                      evaluate_recovery(runs, archetypes_by_rubric(config)))));

  const auto summary = summarize(runs);
  nlohmann::ordered_json j;
  j["profiles"] = summary.profiles;
  j["completed"] = summary.completed;
  j["failed"] = summary.failed;
  j["failed_ids"] = summary.failed_ids;
  j["interviewer"] = policy;
  j["judge"] = std::string(judge::policy_name(config.judge));
  j["turns"] = config.turns;
  j["seed"] = config.seed;
  j["mean_shift"] = summary.mean_shift;
  write_text_file(out_dir / "summary.json", dump_pretty(j));
  return runs;
}

std::map<std::string, std::vector<double>> compare_interviewers(
    const SimulationConfig& config, const std::vector<interview::InterviewerKind>& policies,
    int subset, const Agents& agents, const std::filesystem::path& out_dir) {
  if (policies.empty()) invalid("compare needs at least one interviewer policy");
  validate_config(config);
  const auto profiles = select_profiles(enumerate_profiles(config), subset, config.seed);

  std::map<std::string, std::vector<ProfileRun>> by_policy;
  std::vector<std::string> order;
  std::string shifts = "policy,profile_id,turn,delta\n";
  std::map<std::string, std::vector<double>> curves;
  for (auto kind : policies) {
    const std::string name(interview::interviewer_name(kind));
    if (by_policy.contains(name)) invalid("policy " + name + " listed twice");
    order.push_back(name);
    auto runs = run_profiles(config, profiles, agents, kind, name);
    std::vector<metrics::ShiftSeries> series;
    for (const auto& run : runs) {
      write_profile_run(run, rubric_entry(config, run.rubric_id).rubric,
                        out_dir / "runs" / name / run.profile_id);
      if (run.failed) continue;
      series.push_back(run.shifts);
      for (std::size_t t = 0; t < run.shifts.size(); ++t) {
        shifts += name + "," + run.profile_id + "," + std::to_string(t + 1) + "," +
                  fmt_double(run.shifts[t]) + "\n";
      }
    }
    curves[name] = series.empty() ? std::vector<double>{} : metrics::ctv_curve(series);
    by_policy[name] = std::move(runs);
  }
  write_text_file(out_dir / "shifts.csv", shifts);
  write_text_file(out_dir / "ctv.csv", ctv_csv(by_policy, order));
  return curves;
}

RecoveryEvaluation recover_from_dir(const std::filesystem::path& out_dir) {
  std::map<std::string, Rubric> rubrics;
  std::map<std::string, std::vector<metrics::ArchetypeProfile>> archetypes;
  if (!std::filesystem::is_directory(out_dir / "runs")) {
    throw Error(ErrorCode::kIo, (out_dir / "runs").string() + " not found");
  }
  std::vector<std::filesystem::path> rubric_files;
  for (const auto& e : std::filesystem::directory_iterator(out_dir / "rubrics")) {
    rubric_files.push_back(e.path());
  }
  std::sort(rubric_files.begin(), rubric_files.end());
  for (const auto& f : rubric_files) {
    auto rubric = load_rubric_file(f.string());
    const auto arche_file = out_dir / "archetypes" / (rubric.id() + ".json");
    archetypes[rubric.id()] = load_archetypes(arche_file, rubric);
    rubrics.emplace(rubric.id(), std::move(rubric));
  }
  std::vector<std::filesystem::path> run_dirs;
  for (const auto& e : std::filesystem::directory_iterator(out_dir / "runs")) {
    if (e.is_directory()) run_dirs.push_back(e.path());
  }
  std::sort(run_dirs.begin(), run_dirs.end());
  std::vector<ProfileRun> runs;
  for (const auto& d : run_dirs) runs.push_back(read_profile_run(d, rubrics));
  return evaluate_recovery(runs, archetypes);
}

BeliefState convergent_belief(const Rubric& rubric, const metrics::ArchetypeProfile& truth,
                              int turn, const ConvergentScriptOptions& options) {
  const int l = rubric.num_levels();
  const int middle = (l + 1) / 2;
  const double factor = std::pow(options.rho, turn);
  BeliefState b;
  b.turn = turn;
  for (std::size_t d = 0; d < rubric.num_dimensions(); ++d) {
    Distribution p(static_cast<std::size_t>(l));
    for (int k = 1; k <= l; ++k) {
      const double start = k == middle ? 0.5 : 0.5 / (l - 1);
      const double target =
          k == truth.levels.at(d) ? options.peak : (1.0 - options.peak) / (l - 1);
      p[static_cast<std::size_t>(k - 1)] = target + (start - target) * factor;
    }
    b.posteriors.push_back(std::move(p));
  }
  return b;
}

std::shared_ptr<llm::ScriptedBackend> build_convergent_script(
    const SimulationConfig& config, const std::vector<Profile>& profiles,
    const ConvergentScriptOptions& options) {
  if (!(options.rho > 0.0 && options.rho < 1.0)) invalid("rho must be in (0, 1)");
  auto script = std::make_shared<llm::ScriptedBackend>();
  for (const auto& prefix : options.scope_prefixes) {
    for (const auto& profile : profiles) {
      const auto& rubric = config.rubrics.at(profile.rubric_index).rubric;
      const auto scope = scope_for(prefix, profile.id);
      const auto d_count = rubric.num_dimensions();
      for (int t = 0; t <= config.turns; ++t) {
        const auto belief = convergent_belief(rubric, profile.archetype, t, options);
        const std::vector<std::string> why(
            d_count, t == 0 ? "Initial reading of the resume."
                            : "Turn " + std::to_string(t) + " adds detail consistent with earlier evidence.");
        script->add(std::string(llm::kBeliefPosteriorsSchema), judge::judge_tag(scope, t),
                    judge::make_judge_response(rubric, belief.posteriors, why));
        if (t == 0) continue;
        const auto& dim = rubric.dimensions()[static_cast<std::size_t>(t - 1) % d_count];
        script->add(std::string(llm::kInterviewerQuestionSchema),
                    interview::interviewer_tag(scope, t),
                    {{"question", "Can you walk me through a recent piece of work that involved " +
                                      dim.name + "?"}});
        const std::string reply = "In my last role I handled " + dim.name +
                                  " work day to day; here is a concrete example from turn " +
                                  std::to_string(t) + ".";
        script->add(std::string(llm::kApplicantReplySchema), interview::applicant_tag(scope, t),
                    {{"reply", reply}});
        script->add(std::string(llm::kSanitizedReplySchema), interview::sanitizer_tag(scope, t),
                    {{"reply", reply}});
      }
    }
  }
  return script;
}

}  // namespace btr::sim

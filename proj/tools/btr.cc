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

// btr: command-line front end for simulation, calibration and the service.

#include <csignal>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "btr/calibration.h"
#include "btr/error.h"
#include "btr/io.h"
#include "btr/llm/backends.h"
#include "btr/service.h"
#include "btr/simulation.h"

namespace {

using namespace btr;

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::shared_ptr<llm::Backend> remote_backend() {
  return std::make_shared<llm::RemoteBackend>(llm::RemoteConfig::from_env());
}

PromptLibrary prompts_from(const std::string& dir) {
  return dir.empty() ? PromptLibrary::builtin() : PromptLibrary::with_overrides(dir);
}

service::HttpService* g_service = nullptr;

void on_signal(int) {
  if (g_service) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Belief-tracking interview toolkit"};
  app.require_subcommand(1);

  std::string config_path, backend = "scripted", script_path, out_dir, prompt_dir;

  auto* simulate = app.add_subcommand("simulate", "Run the configured profile simulation");
  simulate->add_option("--config", config_path, "Simulation config (JSON)")->required();
  simulate->add_option("--backend", backend, "scripted or remote")
      ->check(CLI::IsMember({"scripted", "remote"}));
  simulate->add_option("--script", script_path,
                       "Scripted responses; a convergent script is generated when omitted");
  simulate->add_option("--out", out_dir, "Output directory")->required();
  simulate->add_option("--prompts", prompt_dir, "Prompt override directory");

  std::string policies_arg = "belief_aware,belief_unaware,rubric_unaware,shallow_unaware";
  int subset = 30;
  auto* compare = app.add_subcommand("compare", "CTV per interviewer policy on a profile subset");
  compare->add_option("--config", config_path, "Simulation config (JSON)")->required();
  compare->add_option("--policies", policies_arg, "Comma-separated interviewer policies");
  compare->add_option("--profiles", subset, "Profile subset size P");
  compare->add_option("--backend", backend, "scripted or remote")
      ->check(CLI::IsMember({"scripted", "remote"}));
  compare->add_option("--script", script_path, "Scripted responses");
  compare->add_option("--out", out_dir, "Output directory")->required();
  compare->add_option("--prompts", prompt_dir, "Prompt override directory");

  std::string runs_dir, report_path;
  auto* recover = app.add_subcommand("recover", "Recompute archetype recovery from a run tree");
  recover->add_option("--runs", runs_dir, "Output directory of a simulate run")->required();
  recover->add_option("--out", report_path, "Write recovery JSON here instead of stdout");

  std::string corpus_dir, judges_arg = "pba";
  double epsilon = judge::kDefaultEpsilon;
  int max_parallel = 4;
  bool generate_only = false;
  auto* calibrate = app.add_subcommand("calibrate", "Run the metamorphic calibration suite");
  calibrate->add_option("--corpus", corpus_dir, "Corpus directory")->required();
  calibrate->add_option("--judge", judges_arg, "Judge policies, comma-separated (independent,pba)");
  calibrate->add_option("--backend", backend, "scripted or remote")
      ->check(CLI::IsMember({"scripted", "remote"}));
  calibrate->add_option("--script", script_path,
                        "Scripted judge responses; an ideal judge script is used when omitted");
  calibrate->add_option("--epsilon", epsilon, "Change threshold")->check(CLI::NonNegativeNumber);
  calibrate->add_option("--max-parallel", max_parallel, "Concurrent cases")
      ->check(CLI::PositiveNumber);
  calibrate->add_option("--out", out_dir, "Write report.csv and results.jsonl here");
  calibrate->add_flag("--generate-only", generate_only,
                      "Write cases/ and uniform/ into the corpus and exit");
  calibrate->add_option("--prompts", prompt_dir, "Prompt override directory");

  auto* serve = app.add_subcommand("serve", "Run the interview HTTP service");
  serve->add_option("--config", config_path, "Service config (JSON)")->required();

  std::string script_out;
  auto* make_script = app.add_subcommand("make-script", "Write a convergent scripted-backend file");
  make_script->add_option("--config", config_path, "Simulation config (JSON)")->required();
  make_script->add_option("--out", script_out, "Script file to write")->required();
  make_script->add_option("--policies", policies_arg,
                          "Also script compare runs for these policies");
  bool for_compare = false;
  make_script->add_flag("--compare", for_compare, "Script compare runs instead of simulate runs");
  make_script->add_option("--profiles", subset, "Profile subset size for --compare");

  std::string rubric_file;
  auto* check = app.add_subcommand("check-rubric", "Validate a rubric file");
  check->add_option("file", rubric_file, "Rubric JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate || *compare) {
      const auto config = sim::load_simulation_config(config_path);
      std::vector<interview::InterviewerKind> kinds;
      std::vector<sim::Profile> profiles;
      sim::ConvergentScriptOptions script_options;
      if (*compare) {
        for (const auto& name : split_csv(policies_arg)) {
          kinds.push_back(interview::parse_interviewer(name));
        }
        profiles = sim::select_profiles(sim::enumerate_profiles(config), subset, config.seed);
        script_options.scope_prefixes.clear();
        for (auto k : kinds) script_options.scope_prefixes.emplace_back(interview::interviewer_name(k));
      } else {
        profiles = sim::configured_profiles(config);
      }
      std::shared_ptr<llm::Backend> model;
      if (backend == "remote") {
        model = remote_backend();
      } else if (!script_path.empty()) {
        model = llm::ScriptedBackend::from_file(script_path);
      } else {
        model = sim::build_convergent_script(config, profiles, script_options);
      }
      llm::Gateway gateway(model);
      const auto prompts = prompts_from(prompt_dir);
      const sim::Agents agents(gateway, prompts, config);
      if (*simulate) {
        const auto runs = sim::simulate(config, agents, out_dir);
        const auto summary = sim::summarize(runs);
        std::cout << "profiles " << summary.profiles << ", completed " << summary.completed
                  << ", failed " << summary.failed << "\n";
        for (const auto& run : runs) {
          if (run.failed) std::cout << "  failed " << run.profile_id << ": " << run.error << "\n";
        }
        std::cout << "wrote " << out_dir << "\n";
        return summary.failed == 0 ? 0 : 3;
      }
      const auto curves = sim::compare_interviewers(config, kinds, subset, agents, out_dir);
      for (const auto& [policy, curve] : curves) {
        std::cout << policy << ": CTV_T = " << (curve.empty() ? 0.0 : curve.back()) << "\n";
      }
      std::cout << "wrote " << out_dir << "/ctv.csv\n";
      return 0;
    }

    if (*recover) {
      const auto eval = sim::recover_from_dir(runs_dir);
      const auto text = dump_pretty(sim::recovery_evaluation_to_json(eval));
      if (report_path.empty()) {
        std::cout << text;
      } else {
        write_text_file(report_path, text);
      }
      std::cerr << "recovery at T=" << eval.final_turn << ": " << eval.final_pooled.recovery_rate
                << ", resume only: " << eval.initial_pooled.recovery_rate << "\n";
      return 0;
    }

    if (*calibrate) {
      const auto corpus = calibration::load_corpus(corpus_dir);
      if (generate_only) {
        calibration::write_generated_cases(corpus, corpus_dir);
        std::cout << corpus.cases.size() << " metamorphic cases, " << corpus.uniform_cases.size()
                  << " uniform-prior cases written to " << corpus_dir << "\n";
        return 0;
      }
      std::vector<judge::PolicyKind> policies;
      for (const auto& name : split_csv(judges_arg)) policies.push_back(judge::parse_policy(name));
      if (policies.empty()) throw Error(ErrorCode::kInvalidArgument, "no judge policy given");
      std::shared_ptr<llm::Backend> model;
      if (backend == "remote") {
        model = remote_backend();
      } else if (!script_path.empty()) {
        model = llm::ScriptedBackend::from_file(script_path);
      } else {
        model = calibration::build_ideal_judge_script(corpus);
      }
      llm::Gateway gateway(model);
      const auto prompts = prompts_from(prompt_dir);
      const judge::Judge judge(gateway, prompts, judge::JudgeOptions{epsilon, "", {}});
      const calibration::Harness harness(judge, corpus.index);
      const auto report =
          calibration::run_suite(harness, corpus, policies, {epsilon, max_parallel});
      std::cout << calibration::render_report_table(report, policies);
      for (const auto& e : report.errors) std::cerr << "error: " << e << "\n";
      if (!out_dir.empty()) {
        write_text_file(std::filesystem::path(out_dir) / "report.csv",
                        calibration::report_csv(report));
        std::string lines;
        for (const auto& [judge_name, r] : report.results) {
          nlohmann::ordered_json j;
          j["judge"] = judge_name;
          j["case_id"] = r.case_id;
          j["relation"] = std::string(calibration::relation_name(r.relation));
          j["pass"] = r.pass;
          j["statistic"] = r.statistic;
          j["observed_delta"] = r.observed_delta;
          lines += j.dump() + "\n";
        }
        write_text_file(std::filesystem::path(out_dir) / "results.jsonl", lines);
      }
      return report.errored == 0 ? 0 : 3;
    }

    if (*serve) {
      auto config = service::load_service_config(config_path);
      service::apply_env_overrides(config, service::process_env);
      std::map<std::string, Rubric> rubrics;
      if (!config.rubric_dir.empty()) {
        for (const auto& e : std::filesystem::directory_iterator(config.rubric_dir)) {
          if (e.path().extension() != ".json") continue;
          auto r = load_rubric_file(e.path().string());
          const auto id = r.id();
          rubrics.emplace(id, std::move(r));
        }
      }
      if (rubrics.empty()) throw Error(ErrorCode::kInvalidArgument, "service has no rubrics");
      std::shared_ptr<llm::Backend> model;
      if (config.backend == "remote") {
        model = remote_backend();
      } else {
        if (config.script.empty()) {
          throw Error(ErrorCode::kInvalidArgument, "scripted backend needs \"script\" in the config");
        }
        model = llm::ScriptedBackend::from_file(config.script);
      }
      llm::Gateway gateway(model);
      const auto prompts = prompts_from(config.prompt_dir.string());
      const judge::Judge judge(gateway, prompts,
                               judge::JudgeOptions{config.epsilon, config.model_name, config.effort});
      const interview::Interviewer interviewer(
          gateway, prompts, interview::InterviewerOptions{config.model_name, config.effort, ""});
      service::SessionManager sessions(std::move(rubrics), judge, interviewer, config);
      const auto restored = sessions.load_store();
      service::HttpService http(sessions);
      const int port = http.bind(config.host, config.port);
      g_service = &http;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << "listening on " << config.host << ":" << port << " (" << restored
                << " stored sessions)" << std::endl;
      http.serve();
      g_service = nullptr;
      return 0;
    }

    if (*make_script) {
      const auto config = sim::load_simulation_config(config_path);
      sim::ConvergentScriptOptions options;
      std::vector<sim::Profile> profiles;
      if (for_compare) {
        options.scope_prefixes = split_csv(policies_arg);
        for (const auto& p : options.scope_prefixes) interview::parse_interviewer(p);
        profiles = sim::select_profiles(sim::enumerate_profiles(config), subset, config.seed);
      } else {
        profiles = sim::configured_profiles(config);
      }
      const auto script = sim::build_convergent_script(config, profiles, options);
      write_text_file(script_out, script->to_json().dump(1) + "\n");
      std::cout << script->size() << " scripted responses written to " << script_out << "\n";
      return 0;
    }

    if (*check) {
      const auto rubric = load_rubric_file(rubric_file);
      std::cout << rubric.id() << " (" << rubric.domain_name() << "): D=" << rubric.num_dimensions()
                << ", L=" << rubric.num_levels() << "\n";
      for (const auto& a : sim::make_anchor_archetypes(rubric)) {
        std::cout << "  " << a.id << ":";
        for (int l : a.levels) std::cout << ' ' << l;
        std::cout << "\n";
      }
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "btr: " << error_code_name(e.code()) << ": " << e.what() << "\n";
    return 2;
  }
  return 0;
}

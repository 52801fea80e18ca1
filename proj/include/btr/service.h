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

// Live interview sessions: resume intake, turn exchange, per-turn belief
// history and export, served over HTTP.

#ifndef BTR_SERVICE_H_
#define BTR_SERVICE_H_

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "btr/belief.h"
#include "btr/interviewer.h"
#include "btr/judge.h"
#include "btr/rubric.h"
#include "btr/transcript.h"
#include "json.hpp"

namespace btr::service {

enum class SessionStatus { kAwaitingResume, kActive, kCompleted };

std::string_view status_name(SessionStatus s);
SessionStatus parse_status(std::string_view name);

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string backend = "scripted";  // scripted | remote
  std::filesystem::path script;      // scripted backend responses
  std::filesystem::path rubric_dir;
  std::filesystem::path store_dir;   // empty: in-memory only
  std::filesystem::path prompt_dir;  // optional prompt overrides
  int turn_cap = 12;
  bool expose_belief_to_applicant = false;
  interview::InterviewerKind interviewer = interview::InterviewerKind::kBeliefAware;
  judge::PolicyKind judge = judge::PolicyKind::kPba;
  std::string model_name;
  llm::ReasoningEffort effort = llm::ReasoningEffort::kLow;
  double epsilon = judge::kDefaultEpsilon;
};

// JSON file with the ServiceConfig field names ("expose_belief_to_applicant",
// "rubrics" for rubric_dir, "store" for store_dir, "prompts" for
// prompt_dir); relative paths resolve against the file.
ServiceConfig load_service_config(const std::filesystem::path& path);

// BTR_PORT, BTR_BACKEND, BTR_TURN_CAP, BTR_EXPOSE_BELIEF, BTR_STORE_DIR.
using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
void apply_env_overrides(ServiceConfig& config, const EnvLookup& lookup);
std::optional<std::string> process_env(const std::string& name);

struct SessionOptions {
  std::optional<interview::InterviewerKind> interviewer;
  std::optional<judge::PolicyKind> judge;
  std::optional<int> turn_cap;
  // Scope used in model-call tags; defaults to the session id. Setting it to
  // a simulation profile id replays that profile's script.
  std::optional<std::string> tag_scope;
};

// Result of submit_resume / submit_answer.
struct TurnOutcome {
  std::string session_id;
  SessionStatus status = SessionStatus::kAwaitingResume;
  int turn = 0;
  std::optional<std::string> question;  // absent once completed
  std::string belief_record;            // serialized JSON for this turn
};

struct SessionInfo {
  std::string session_id;
  std::string rubric_id;
  SessionStatus status = SessionStatus::kAwaitingResume;
  int turns_completed = 0;
  int turn_cap = 0;
  std::optional<std::string> pending_question;
};

class SessionManager {
 public:
  using IdGenerator = std::function<std::string()>;

  SessionManager(std::map<std::string, Rubric> rubrics, const judge::Judge& judge,
                 const interview::Interviewer& interviewer, ServiceConfig config,
                 IdGenerator ids = {});

  // Error(kNotFound) for an unknown rubric; kInvalidArgument for a bad cap.
  std::string create_session(const std::string& rubric_id, const SessionOptions& options = {});

  // kWrongStatus unless awaiting_resume; kInvalidArgument for empty text.
  // Gateway failures leave the session untouched.
  TurnOutcome submit_resume(const std::string& id, const std::string& resume_text);

  // kWrongStatus unless active. The turn is committed only after the judge
  // update and the next question both succeed.
  TurnOutcome submit_answer(const std::string& id, const std::string& answer_text);

  // Serialized belief record {"turn", "posteriors", "audit"}; identical bytes
  // on every call. kOutOfRange outside 0..latest.
  std::string get_belief(const std::string& id, int turn) const;

  nlohmann::ordered_json export_session(const std::string& id) const;
  SessionInfo info(const std::string& id) const;

  const std::map<std::string, Rubric>& rubrics() const { return rubrics_; }
  const ServiceConfig& config() const { return config_; }

  // Reloads every session persisted under config.store_dir.
  std::size_t load_store();

 private:
  struct Session;
  std::shared_ptr<Session> find(const std::string& id) const;
  void persist(const Session& s) const;

  std::map<std::string, Rubric> rubrics_;
  const judge::Judge& judge_;
  const interview::Interviewer& interviewer_;
  ServiceConfig config_;
  IdGenerator ids_;

  mutable std::shared_mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
};

// HTTP front end. Endpoints:
//   POST /sessions                    {"rubric_id", "interviewer"?, "judge"?,
//                                      "turn_cap"?, "tag_scope"?}
//   POST /sessions/{id}/resume        {"resume"}
//   POST /sessions/{id}/answer        {"answer"}
//   GET  /sessions/{id}
//   GET  /sessions/{id}/belief/{turn}
//   GET  /sessions/{id}/export
//   GET  /rubrics
// Errors: {"error": code, "message": text}. Belief-bearing data needs the
// header "X-BTR-Role: operator" unless belief is exposed to applicants.
class HttpService {
 public:
  explicit HttpService(SessionManager& sessions);
  ~HttpService();
  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  // Binds host:port (port 0 picks a free port) and returns the bound port.
  int bind(const std::string& host, int port);
  // Blocks serving requests until stop().
  void serve();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

inline constexpr const char* kRoleHeader = "X-BTR-Role";
inline constexpr const char* kOperatorRole = "operator";

}  // namespace btr::service

#endif  // BTR_SERVICE_H_

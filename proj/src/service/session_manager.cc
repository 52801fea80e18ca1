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

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <random>

#include "btr/error.h"
#include "btr/io.h"
#include "btr/service.h"

namespace btr::service {
namespace {

bool blank(const std::string& s) { return s.find_first_not_of(" \t\r\n") == std::string::npos; }

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

bool parse_bool(const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw Error(ErrorCode::kInvalidArgument, "not a boolean: \"" + v + "\"");
}

int parse_int(const std::string& name, const std::string& v) {
  try {
    std::size_t used = 0;
    const int out = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidArgument, name + " is not an integer: \"" + v + "\"");
  }
}

std::string random_id() {
  static std::mutex mu;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(mu);
  char buf[24];
  std::snprintf(buf, sizeof(buf), "s-%016llx", static_cast<unsigned long long>(rng()));
  return buf;
}

nlohmann::ordered_json audit_line(int turn, const std::vector<AuditEntry>& entries) {
  nlohmann::ordered_json line;
  line["turn"] = turn;
  line["entries"] = nlohmann::ordered_json::array();
  for (const auto& e : entries) line["entries"].push_back(audit_entry_to_json(e));
  return line;
}

}  // namespace

std::string_view status_name(SessionStatus s) {
  switch (s) {
    case SessionStatus::kAwaitingResume: return "awaiting_resume";
    case SessionStatus::kActive: return "active";
    case SessionStatus::kCompleted: return "completed";
  }
  return "awaiting_resume";
}

SessionStatus parse_status(std::string_view name) {
  for (auto s : {SessionStatus::kAwaitingResume, SessionStatus::kActive, SessionStatus::kCompleted}) {
    if (status_name(s) == name) return s;
  }
  throw Error(ErrorCode::kParse, "unknown session status \"" + std::string(name) + "\"");
}

ServiceConfig load_service_config(const std::filesystem::path& path) {
  const auto j = read_json_file(path);
  const auto base = path.parent_path();
  ServiceConfig c;
  try {
    c.host = j.value("host", c.host);
    c.port = j.value("port", c.port);
    c.backend = j.value("backend", c.backend);
    c.script = resolve(base, j.value("script", std::string()));
    c.rubric_dir = resolve(base, j.value("rubrics", std::string()));
    c.store_dir = resolve(base, j.value("store", std::string()));
    c.prompt_dir = resolve(base, j.value("prompts", std::string()));
    c.turn_cap = j.value("turn_cap", c.turn_cap);
    c.expose_belief_to_applicant = j.value("expose_belief_to_applicant", false);
    if (j.contains("interviewer")) {
      c.interviewer = interview::parse_interviewer(j.at("interviewer").get<std::string>());
    }
    if (j.contains("judge")) c.judge = judge::parse_policy(j.at("judge").get<std::string>());
    c.model_name = j.value("model", std::string());
    c.effort = llm::parse_effort(j.value("effort", std::string("low")));
    c.epsilon = j.value("epsilon", judge::kDefaultEpsilon);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
  return c;
}

std::optional<std::string> process_env(const std::string& name) {
  if (const char* v = std::getenv(name.c_str()); v && *v) return std::string(v);
  return std::nullopt;
}

void apply_env_overrides(ServiceConfig& config, const EnvLookup& lookup) {
  if (auto v = lookup("BTR_PORT")) config.port = parse_int("BTR_PORT", *v);
  if (auto v = lookup("BTR_BACKEND")) config.backend = *v;
  if (auto v = lookup("BTR_TURN_CAP")) config.turn_cap = parse_int("BTR_TURN_CAP", *v);
  if (auto v = lookup("BTR_EXPOSE_BELIEF")) config.expose_belief_to_applicant = parse_bool(*v);
  if (auto v = lookup("BTR_STORE_DIR")) config.store_dir = *v;
  if (config.backend != "scripted" && config.backend != "remote") {
    throw Error(ErrorCode::kInvalidArgument, "backend must be scripted or remote");
  }
  if (config.turn_cap < 1) throw Error(ErrorCode::kInvalidArgument, "turn cap must be >= 1");
}

struct SessionManager::Session {
  // Held for the whole of a mutating request.
  std::mutex lease;
  // Held exclusively only while a finished turn is committed.
  mutable std::shared_mutex state;

  std::string id;
  std::string rubric_id;
  const Rubric* rubric = nullptr;
  interview::InterviewerKind interviewer = interview::InterviewerKind::kBeliefAware;
  judge::PolicyKind judge = judge::PolicyKind::kPba;
  int turn_cap = 12;
  std::string scope;

  SessionStatus status = SessionStatus::kAwaitingResume;
  Transcript transcript;
  std::vector<BeliefState> beliefs;
  std::vector<std::vector<AuditEntry>> audits;
  std::vector<std::string> records;  // serialized, never rewritten
  std::optional<std::string> pending_question;
};

SessionManager::SessionManager(std::map<std::string, Rubric> rubrics, const judge::Judge& judge,
                               const interview::Interviewer& interviewer, ServiceConfig config,
                               IdGenerator ids)
    : rubrics_(std::move(rubrics)),
      judge_(judge),
      interviewer_(interviewer),
      config_(std::move(config)),
      ids_(ids ? std::move(ids) : IdGenerator(random_id)) {}

std::shared_ptr<SessionManager::Session> SessionManager::find(const std::string& id) const {
  std::shared_lock lock(sessions_mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::kNotFound, "unknown session " + id);
  return it->second;
}

std::string SessionManager::create_session(const std::string& rubric_id,
                                           const SessionOptions& options) {
  const auto rubric_it = rubrics_.find(rubric_id);
  if (rubric_it == rubrics_.end()) {
    throw Error(ErrorCode::kNotFound, "unknown rubric " + rubric_id);
  }
  const int cap = options.turn_cap.value_or(config_.turn_cap);
  if (cap < 1) throw Error(ErrorCode::kInvalidArgument, "turn cap must be >= 1");
  if (options.tag_scope && blank(*options.tag_scope)) {
    throw Error(ErrorCode::kInvalidArgument, "tag_scope must not be blank");
  }

  auto session = std::make_shared<Session>();
  session->rubric_id = rubric_id;
  session->rubric = &rubric_it->second;
  session->interviewer = options.interviewer.value_or(config_.interviewer);
  session->judge = options.judge.value_or(config_.judge);
  session->turn_cap = cap;

  std::unique_lock lock(sessions_mutex_);
  std::string id;
  do {
    id = ids_();
  } while (sessions_.contains(id));
  session->id = id;
  session->scope = options.tag_scope.value_or(id);
  sessions_.emplace(id, session);
  lock.unlock();
  persist(*session);
  return id;
}

TurnOutcome SessionManager::submit_resume(const std::string& id, const std::string& resume_text) {
  auto s = find(id);
  std::lock_guard lease(s->lease);
  if (s->status != SessionStatus::kAwaitingResume) {
    throw Error(ErrorCode::kWrongStatus, "session " + id + " is " +
                                             std::string(status_name(s->status)) +
                                             "; a resume was already submitted");
  }
  if (blank(resume_text)) throw Error(ErrorCode::kInvalidArgument, "resume text is empty");

  const Rubric& rubric = *s->rubric;
  auto init = judge_.initialize(rubric, resume_text, s->judge, s->scope);
  const Transcript transcript(resume_text);
  const auto inputs = interview::required_inputs(s->interviewer);
  auto question = interviewer_.next_question(s->interviewer, transcript,
                                             inputs.rubric ? &rubric : nullptr,
                                             inputs.previous_belief ? &init.belief : nullptr,
                                             s->scope);
  auto record = belief_record_to_json(init.belief, init.audit, rubric).dump();

  {
    std::unique_lock commit(s->state);
    s->transcript = transcript;
    s->beliefs.push_back(std::move(init.belief));
    s->audits.push_back(std::move(init.audit));
    s->records.push_back(record);
    s->pending_question = question;
    s->status = SessionStatus::kActive;
  }
  persist(*s);
  return {id, SessionStatus::kActive, 0, std::move(question), std::move(record)};
}

TurnOutcome SessionManager::submit_answer(const std::string& id, const std::string& answer_text) {
  auto s = find(id);
  std::lock_guard lease(s->lease);
  if (s->status != SessionStatus::kActive) {
    throw Error(ErrorCode::kWrongStatus, "session " + id + " is " +
                                             std::string(status_name(s->status)) +
                                             "; answers are accepted only while active");
  }
  if (blank(answer_text)) throw Error(ErrorCode::kInvalidArgument, "answer text is empty");

  // Everything below works on copies until the commit block.
  const Rubric& rubric = *s->rubric;
  Transcript next = s->transcript;
  next.append(*s->pending_question, answer_text);
  auto update = judge_.update(rubric, next, s->beliefs.back(), s->judge, s->scope);
  const int turn = static_cast<int>(next.size());
  std::optional<std::string> question;
  if (turn < s->turn_cap) {
    const auto inputs = interview::required_inputs(s->interviewer);
    question = interviewer_.next_question(s->interviewer, next,
                                          inputs.rubric ? &rubric : nullptr,
                                          inputs.previous_belief ? &update.belief : nullptr,
                                          s->scope);
  }
  auto record = belief_record_to_json(update.belief, update.audit, rubric).dump();
  const auto status = question ? SessionStatus::kActive : SessionStatus::kCompleted;

  {
    std::unique_lock commit(s->state);
    s->transcript = std::move(next);
    s->beliefs.push_back(std::move(update.belief));
    s->audits.push_back(std::move(update.audit));
    s->records.push_back(record);
    s->pending_question = question;
    s->status = status;
  }
  persist(*s);
  return {id, status, turn, std::move(question), std::move(record)};
}

std::string SessionManager::get_belief(const std::string& id, int turn) const {
  auto s = find(id);
  std::shared_lock read(s->state);
  if (turn < 0 || static_cast<std::size_t>(turn) >= s->records.size()) {
    throw Error(ErrorCode::kOutOfRange,
                "turn " + std::to_string(turn) + " not available; session " + id + " has " +
                    (s->records.empty() ? std::string("no belief yet")
                                        : "turns 0.." + std::to_string(s->records.size() - 1)));
  }
  return s->records[static_cast<std::size_t>(turn)];
}

nlohmann::ordered_json SessionManager::export_session(const std::string& id) const {
  auto s = find(id);
  std::shared_lock read(s->state);
  nlohmann::ordered_json j;
  j["session_id"] = s->id;
  j["rubric_id"] = s->rubric_id;
  j["status"] = std::string(status_name(s->status));
  j["partial"] = s->status != SessionStatus::kCompleted;
  j["interviewer"] = std::string(interview::interviewer_name(s->interviewer));
  j["judge"] = std::string(judge::policy_name(s->judge));
  j["turn_cap"] = s->turn_cap;
  j["rubric"] = rubric_to_json(*s->rubric);
  j["transcript"] = transcript_to_json(s->transcript);
  j["belief_log"] = nlohmann::ordered_json::array();
  for (const auto& r : s->records) {
    auto record = nlohmann::ordered_json::parse(r);
    record.erase("audit");
    j["belief_log"].push_back(std::move(record));
  }
  j["audit_log"] = nlohmann::ordered_json::array();
  for (std::size_t t = 0; t < s->audits.size(); ++t) {
    j["audit_log"].push_back(audit_line(s->beliefs[t].turn, s->audits[t]));
  }
  return j;
}

SessionInfo SessionManager::info(const std::string& id) const {
  auto s = find(id);
  std::shared_lock read(s->state);
  return {s->id, s->rubric_id, s->status, static_cast<int>(s->transcript.size()), s->turn_cap,
          s->pending_question};
}

void SessionManager::persist(const Session& s) const {
  if (config_.store_dir.empty()) return;
  const auto dir = config_.store_dir / s.id;
  std::shared_lock read(s.state);
  nlohmann::ordered_json meta;
  meta["session_id"] = s.id;
  meta["rubric_id"] = s.rubric_id;
  meta["status"] = std::string(status_name(s.status));
  meta["interviewer"] = std::string(interview::interviewer_name(s.interviewer));
  meta["judge"] = std::string(judge::policy_name(s.judge));
  meta["turn_cap"] = s.turn_cap;
  meta["tag_scope"] = s.scope;
  meta["pending_question"] =
      s.pending_question ? nlohmann::ordered_json(*s.pending_question) : nlohmann::ordered_json();
  std::string beliefs;
  std::string audits;
  for (std::size_t t = 0; t < s.records.size(); ++t) {
    auto record = nlohmann::ordered_json::parse(s.records[t]);
    record.erase("audit");
    beliefs += record.dump() + "\n";
    audits += audit_line(s.beliefs[t].turn, s.audits[t]).dump() + "\n";
  }
  const auto transcript = s.transcript.resume_text().empty()
                              ? std::string()
                              : dump_pretty(transcript_to_json(s.transcript));
  read.unlock();
  write_text_file(dir / "belief_log.jsonl", beliefs);
  write_text_file(dir / "audit.jsonl", audits);
  if (!transcript.empty()) write_text_file(dir / "transcript.json", transcript);
  write_text_file(dir / "session.json", dump_pretty(meta));
}

std::size_t SessionManager::load_store() {
  if (config_.store_dir.empty() || !std::filesystem::is_directory(config_.store_dir)) return 0;
  std::vector<std::filesystem::path> dirs;
  for (const auto& e : std::filesystem::directory_iterator(config_.store_dir)) {
    if (e.is_directory() && std::filesystem::exists(e.path() / "session.json")) {
      dirs.push_back(e.path());
    }
  }
  std::sort(dirs.begin(), dirs.end());
  std::size_t loaded = 0;
  for (const auto& dir : dirs) {
    const auto meta = read_json_file(dir / "session.json");
    auto s = std::make_shared<Session>();
    try {
      s->id = meta.at("session_id").get<std::string>();
      s->rubric_id = meta.at("rubric_id").get<std::string>();
      const auto rubric_it = rubrics_.find(s->rubric_id);
      if (rubric_it == rubrics_.end()) {
        throw Error(ErrorCode::kNotFound,
                    "stored session " + s->id + " uses unknown rubric " + s->rubric_id);
      }
      s->rubric = &rubric_it->second;
      s->status = parse_status(meta.at("status").get<std::string>());
      s->interviewer = interview::parse_interviewer(meta.at("interviewer").get<std::string>());
      s->judge = judge::parse_policy(meta.at("judge").get<std::string>());
      s->turn_cap = meta.at("turn_cap").get<int>();
      s->scope = meta.at("tag_scope").get<std::string>();
      if (!meta.at("pending_question").is_null()) {
        s->pending_question = meta.at("pending_question").get<std::string>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParse, (dir / "session.json").string() + ": " + e.what());
    }
    if (std::filesystem::exists(dir / "transcript.json")) {
      s->transcript = transcript_from_json(read_json_file(dir / "transcript.json"));
    }
    const auto belief_lines = read_jsonl_file(dir / "belief_log.jsonl");
    const auto audit_lines = read_jsonl_file(dir / "audit.jsonl");
    if (belief_lines.size() != audit_lines.size()) {
      throw Error(ErrorCode::kParse, "stored session " + s->id + " has mismatched logs");
    }
    for (std::size_t t = 0; t < belief_lines.size(); ++t) {
      auto belief = belief_record_from_json(belief_lines[t], *s->rubric).belief;
      std::vector<AuditEntry> audit;
      for (const auto& e : audit_lines[t].at("entries")) audit.push_back(audit_entry_from_json(e));
      s->records.push_back(belief_record_to_json(belief, audit, *s->rubric).dump());
      s->beliefs.push_back(std::move(belief));
      s->audits.push_back(std::move(audit));
    }
    const auto expected = s->status == SessionStatus::kAwaitingResume ? 0 : s->transcript.size() + 1;
    if (s->beliefs.size() != expected) {
      throw Error(ErrorCode::kParse, "stored session " + s->id +
                                         " has a belief log that does not match its transcript");
    }
    std::unique_lock lock(sessions_mutex_);
    sessions_[s->id] = s;
    ++loaded;
  }
  return loaded;
}

}  // namespace btr::service

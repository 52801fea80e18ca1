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

#include "httplib.h"

#include "btr/error.h"
#include "btr/service.h"

namespace btr::service {
namespace {

constexpr const char* kJson = "application/json";

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound:
    case ErrorCode::kOutOfRange: return 404;
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kParse: return 400;
    case ErrorCode::kWrongStatus: return 409;
    case ErrorCode::kNetwork:
    case ErrorCode::kAuthentication:
    case ErrorCode::kSchemaViolation:
    case ErrorCode::kScriptMiss:
    case ErrorCode::kUpstream: return 502;
    case ErrorCode::kIo: return 500;
  }
  return 500;
}

void send_error(httplib::Response& res, int status, std::string_view code,
                const std::string& message) {
  nlohmann::ordered_json body;
  body["error"] = std::string(code);
  body["message"] = message;
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void send_json(httplib::Response& res, int status, const nlohmann::ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

nlohmann::json request_body(const httplib::Request& req) {
  if (req.body.empty()) return nlohmann::json::object();
  try {
    auto j = nlohmann::json::parse(req.body);
    if (!j.is_object()) throw Error(ErrorCode::kParse, "request body must be a JSON object");
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed JSON body: ") + e.what());
  }
}

std::string required_string(const nlohmann::json& body, const char* key) {
  if (!body.contains(key) || !body.at(key).is_string()) {
    throw Error(ErrorCode::kInvalidArgument, std::string("body needs a string \"") + key + "\"");
  }
  return body.at(key).get<std::string>();
}

}  // namespace

struct HttpService::Impl {
  SessionManager& sessions;
  httplib::Server server;

  explicit Impl(SessionManager& s) : sessions(s) {}

  bool may_see_belief(const httplib::Request& req) const {
    return sessions.config().expose_belief_to_applicant ||
           req.get_header_value(kRoleHeader) == kOperatorRole;
  }

  // Runs a handler, mapping library errors onto the JSON error envelope.
  template <typename Fn>
  httplib::Server::Handler guarded(Fn fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const Error& e) {
        send_error(res, http_status(e.code()), error_code_name(e.code()), e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, "internal", e.what());
      }
    };
  }

  nlohmann::ordered_json outcome_json(const TurnOutcome& o, bool with_belief) const {
    nlohmann::ordered_json j;
    j["session_id"] = o.session_id;
    j["status"] = std::string(status_name(o.status));
    j["turn"] = o.turn;
    j["question"] = o.question ? nlohmann::ordered_json(*o.question) : nlohmann::ordered_json();
    j["completed"] = o.status == SessionStatus::kCompleted;
    if (with_belief) j["belief"] = nlohmann::ordered_json::parse(o.belief_record);
    return j;
  }

  void routes() {
    server.Get("/rubrics", guarded([this](const httplib::Request&, httplib::Response& res) {
      nlohmann::ordered_json j;
      j["rubrics"] = nlohmann::ordered_json::array();
      for (const auto& [id, rubric] : sessions.rubrics()) j["rubrics"].push_back(rubric_to_json(rubric));
      send_json(res, 200, j);
    }));

    server.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto body = request_body(req);
      SessionOptions options;
      if (body.contains("interviewer")) {
        options.interviewer =
            interview::parse_interviewer(body.at("interviewer").get<std::string>());
      }
      if (body.contains("judge")) options.judge = judge::parse_policy(body.at("judge").get<std::string>());
      if (body.contains("turn_cap")) options.turn_cap = body.at("turn_cap").get<int>();
      if (body.contains("tag_scope")) options.tag_scope = body.at("tag_scope").get<std::string>();
      const auto id = sessions.create_session(required_string(body, "rubric_id"), options);
      nlohmann::ordered_json j;
      j["session_id"] = id;
      j["status"] = std::string(status_name(SessionStatus::kAwaitingResume));
      send_json(res, 201, j);
    }));

    server.Get(R"(/sessions/([^/]+))",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const auto info = sessions.info(req.matches[1]);
                 nlohmann::ordered_json j;
                 j["session_id"] = info.session_id;
                 j["rubric_id"] = info.rubric_id;
                 j["status"] = std::string(status_name(info.status));
                 j["turns_completed"] = info.turns_completed;
                 j["turn_cap"] = info.turn_cap;
                 j["question"] = info.pending_question ? nlohmann::ordered_json(*info.pending_question)
                                                       : nlohmann::ordered_json();
                 send_json(res, 200, j);
               }));

    server.Post(R"(/sessions/([^/]+)/resume)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const auto body = request_body(req);
                  const auto outcome =
                      sessions.submit_resume(req.matches[1], required_string(body, "resume"));
                  send_json(res, 200, outcome_json(outcome, may_see_belief(req)));
                }));

    server.Post(R"(/sessions/([^/]+)/answer)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const auto body = request_body(req);
                  const auto outcome =
                      sessions.submit_answer(req.matches[1], required_string(body, "answer"));
                  send_json(res, 200, outcome_json(outcome, may_see_belief(req)));
                }));

    server.Get(R"(/sessions/([^/]+)/belief/(-?\d+))",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 if (!may_see_belief(req)) {
                   send_error(res, 403, "forbidden", "belief is visible to operators only");
                   return;
                 }
                 int turn = 0;
                 try {
                   turn = std::stoi(req.matches[2]);
                 } catch (const std::exception&) {
                   throw Error(ErrorCode::kOutOfRange, "turn out of range");
                 }
                 res.status = 200;
                 res.set_content(sessions.get_belief(req.matches[1], turn), kJson);
               }));

    server.Get(R"(/sessions/([^/]+)/export)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 if (!may_see_belief(req)) {
                   send_error(res, 403, "forbidden", "export is available to operators only");
                   return;
                 }
                 send_json(res, 200, sessions.export_session(req.matches[1]));
               }));

    server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
      if (!res.body.empty()) return;
      send_error(res, res.status == 404 ? 404 : res.status,
                 res.status == 404 ? "not_found" : "http_error",
                 "no route for " + req.method + " " + req.path);
    });
  }
};

HttpService::HttpService(SessionManager& sessions) : impl_(std::make_unique<Impl>(sessions)) {
  impl_->routes();
}

HttpService::~HttpService() { stop(); }

int HttpService::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorCode::kNetwork, "cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw Error(ErrorCode::kNetwork, "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void HttpService::serve() { impl_->server.listen_after_bind(); }

void HttpService::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

bool HttpService::running() const { return impl_->server.is_running(); }

}  // namespace btr::service

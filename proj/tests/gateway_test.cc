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


#include "btr/llm/gateway.h"

#include <memory>
#include <string>
#include <thread>

#include <gtest/gtest.h>

#include "btr/error.h"
#include "btr/llm/backends.h"
#include "btr/llm/schema.h"
#include "httplib.h"
#include "test_support.h"

namespace btr::llm {
namespace {

using btr::testing::QueueBackend;

ModelRequest question_request(std::string tag = "s/interviewer/turn-1") {
  ModelRequest r;
  r.system_prompt = "system";
  r.messages = {{"user", "ask something"}};
  r.schema_id = std::string(kInterviewerQuestionSchema);
  r.tag = std::move(tag);
  r.scope = "s";
  return r;
}

TEST(SchemaTest, CheckShapeSubset) {
  const nlohmann::json shape = {
      {"type", "object"},
      {"required", {"xs", "kind"}},
      {"properties",
       {{"xs", {{"type", "array"}, {"minItems", 2}, {"maxItems", 3}, {"items", {{"type", "integer"}}}}},
        {"kind", {{"type", "string"}, {"enum", {"a", "b"}}}},
        {"note", {{"type", "string"}, {"minLength", 2}}},
        {"flag", {{"type", "boolean"}}},
        {"w", {{"type", "number"}}}}}};
  EXPECT_FALSE(check_shape(shape, {{"xs", {1, 2}}, {"kind", "a"}}));
  EXPECT_TRUE(check_shape(shape, {{"xs", {1}}, {"kind", "a"}}));
  EXPECT_TRUE(check_shape(shape, {{"xs", {1, 2, 3, 4}}, {"kind", "a"}}));
  EXPECT_TRUE(check_shape(shape, {{"xs", {1, 2.5}}, {"kind", "a"}}));
  EXPECT_TRUE(check_shape(shape, {{"xs", {1, 2}}, {"kind", "c"}}));
  EXPECT_TRUE(check_shape(shape, {{"xs", {1, 2}}}));
  EXPECT_TRUE(check_shape(shape, {{"xs", {1, 2}}, {"kind", "a"}, {"note", "x"}}));
  EXPECT_TRUE(check_shape(shape, {{"xs", {1, 2}}, {"kind", "a"}, {"flag", 1}}));
  EXPECT_FALSE(check_shape(shape, {{"xs", {1, 2}}, {"kind", "a"}, {"w", 3}}));
  EXPECT_TRUE(check_shape(shape, nlohmann::json::array()));
}

TEST(SchemaTest, RegistryRejectsDuplicatesAndUnknowns) {
  SchemaRegistry reg;
  register_builtin_schemas(reg);
  EXPECT_TRUE(reg.contains(kBeliefPosteriorsSchema));
  EXPECT_TRUE(reg.contains(kSanitizedReplySchema));
  EXPECT_THROW(reg.register_schema(std::string(kApplicantReplySchema), {{"type", "object"}}),
               Error);
  EXPECT_THROW(reg.register_schema("bad", nlohmann::json::object()), Error);
  EXPECT_THROW(reg.shape("missing"), Error);
}

TEST(GatewayTest, ExtractJsonFromProse) {
  EXPECT_EQ(extract_json(R"({"a":1})")->at("a"), 1);
  const auto j = extract_json("Sure! Here it is: {\"q\": \"a } inside\", \"n\": {\"x\": 2}} done");
  ASSERT_TRUE(j);
  EXPECT_EQ(j->at("q"), "a } inside");
  EXPECT_EQ(j->at("n").at("x"), 2);
  EXPECT_FALSE(extract_json("no json here"));
  EXPECT_FALSE(extract_json("[1, 2]"));
}

TEST(GatewayTest, FirstValidReplyNeedsNoRepair) {
  auto backend = std::make_shared<QueueBackend>(std::vector<std::string>{R"({"question":"Why?"})"});
  Gateway gw(backend);
  const auto r = gw.complete(question_request());
  EXPECT_EQ(r.parsed.at("question"), "Why?");
  EXPECT_EQ(r.attempts, 1);
  EXPECT_EQ(r.usage.calls, 1);
}

TEST(GatewayTest, RepairLoopAppendsEchoAndInstruction) {
  auto backend = std::make_shared<QueueBackend>(std::vector<std::string>{
      "not json", R"({"question": ""})", R"({"question":"ok"})"});
  Gateway gw(backend);
  const auto r = gw.complete(question_request());
  EXPECT_EQ(r.attempts, 3);
  EXPECT_EQ(r.usage.calls, 3);
  EXPECT_EQ(r.usage.prompt_tokens, 30);
  ASSERT_EQ(backend->requests().size(), 3u);
  const auto& last = backend->requests()[2].messages;
  ASSERT_EQ(last.size(), 5u);
  EXPECT_EQ(last[1].role, "assistant");
  EXPECT_EQ(last[1].content, "not json");
  EXPECT_EQ(last[2].role, "user");
  EXPECT_EQ(last[3].content, R"({"question": ""})");
  EXPECT_EQ(backend->requests()[2].tag, "s/interviewer/turn-1");
}

TEST(GatewayTest, SchemaViolationAfterRetriesExhausted) {
  auto backend = std::make_shared<QueueBackend>(
      std::vector<std::string>{"x", "y", "z", R"({"question":"late"})"});
  Gateway gw(backend);
  try {
    gw.complete(question_request());
    FAIL() << "expected a schema violation";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchemaViolation);
  }
  EXPECT_EQ(backend->requests().size(), 3u);
  EXPECT_EQ(gw.usage_for("s").calls, 3);
}

TEST(GatewayTest, RepairRetriesAreConfigurable) {
  auto backend = std::make_shared<QueueBackend>(std::vector<std::string>{"x", R"({"question":"q"})"});
  Gateway gw(backend, GatewayOptions{0});
  EXPECT_THROW(gw.complete(question_request()), Error);
  EXPECT_THROW(Gateway(backend, GatewayOptions{-1}), Error);
}

TEST(GatewayTest, ValidatorRejectionTriggersRepair) {
  auto backend = std::make_shared<QueueBackend>(
      std::vector<std::string>{R"({"question":"bad"})", R"({"question":"good"})"});
  Gateway gw(backend);
  auto req = question_request();
  req.validator = [](const nlohmann::json& v) -> std::optional<std::string> {
    if (v.at("question") == "bad") return "question must be good";
    return std::nullopt;
  };
  EXPECT_EQ(gw.complete(req).parsed.at("question"), "good");
  EXPECT_NE(backend->requests()[1].messages.back().content.find("question must be good"),
            std::string::npos);
}

TEST(GatewayTest, BackendErrorsPropagateUnchanged) {
  auto backend = std::make_shared<QueueBackend>(std::vector<std::string>{});
  Gateway gw(backend);
  try {
    gw.complete(question_request());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kScriptMiss);
  }
}

TEST(GatewayTest, RejectsUnknownSchemaAndEmptyMessages) {
  Gateway gw(std::make_shared<QueueBackend>(std::vector<std::string>{}));
  auto r = question_request();
  r.schema_id = "nope";
  EXPECT_THROW(gw.complete(r), Error);
  r = question_request();
  r.messages.clear();
  EXPECT_THROW(gw.complete(r), Error);
}

TEST(GatewayTest, UsageIsTrackedPerScope) {
  auto backend = std::make_shared<QueueBackend>(std::vector<std::string>{
      R"({"question":"a"})", R"({"question":"b"})", R"({"question":"c"})"});
  Gateway gw(backend);
  gw.complete(question_request());
  auto other = question_request();
  other.scope = "t";
  gw.complete(other);
  gw.complete(other);
  EXPECT_EQ(gw.usage_for("s").calls, 1);
  EXPECT_EQ(gw.usage_for("t").calls, 2);
  EXPECT_EQ(gw.usage_for("none").calls, 0);
  EXPECT_EQ(gw.total_usage().calls, 3);
  EXPECT_EQ(gw.total_usage().completion_tokens, 15);
}

TEST(ScriptedBackendTest, MatchKeyIsStableFnv) {
  EXPECT_EQ(match_key("a", "b"), match_key("a", "b"));
  EXPECT_NE(match_key("a", "b"), match_key("b", "a"));
  EXPECT_NE(match_key("ab", ""), match_key("a", "b"));
  EXPECT_EQ(match_key("", "").size(), 16u);
}

TEST(ScriptedBackendTest, ReplaysByTagWithWildcardFallback) {
  auto backend = std::make_shared<ScriptedBackend>();
  backend->add(std::string(kInterviewerQuestionSchema), "s/interviewer/turn-1",
               {{"question", "exact"}});
  backend->add(std::string(kInterviewerQuestionSchema), "*", {{"question", "fallback"}});
  EXPECT_THROW(backend->add(std::string(kInterviewerQuestionSchema), "*", {{"question", "x"}}),
               Error);
  Gateway gw(backend);
  EXPECT_EQ(gw.complete(question_request()).parsed.at("question"), "exact");
  EXPECT_EQ(gw.complete(question_request("s/interviewer/turn-9")).parsed.at("question"),
            "fallback");
  auto reply = question_request();
  reply.schema_id = std::string(kApplicantReplySchema);
  try {
    gw.complete(reply);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kScriptMiss);
  }
}

TEST(ScriptedBackendTest, PromptWordingDoesNotAffectReplay) {
  auto backend = std::make_shared<ScriptedBackend>();
  backend->add(std::string(kInterviewerQuestionSchema), "s/interviewer/turn-1",
               {{"question", "same"}});
  auto a = question_request();
  auto b = question_request();
  b.system_prompt = "completely different";
  b.messages = {{"user", "other words"}};
  EXPECT_EQ(backend->send(a).text, backend->send(b).text);
}

TEST(ScriptedBackendTest, JsonRoundTrip) {
  ScriptedBackend backend;
  backend.add("sch", "t1", {{"question", "one"}});
  backend.add("sch", "t2", {{"question", "two"}});
  const auto copy = ScriptedBackend::from_json(nlohmann::json::parse(backend.to_json().dump()));
  EXPECT_EQ(copy->size(), 2u);
  EXPECT_EQ(copy->to_json(), backend.to_json());
  const auto by_key = ScriptedBackend::from_json(nlohmann::json::array(
      {{{"match_key", match_key("sch", "t3")}, {"response", {{"question", "three"}}}}}));
  ModelRequest r = question_request("t3");
  r.schema_id = "sch";
  EXPECT_EQ(nlohmann::json::parse(by_key->send(r).text).at("question"), "three");
  EXPECT_THROW(ScriptedBackend::from_json(nlohmann::json::object()), Error);
  EXPECT_THROW(ScriptedBackend::from_json(nlohmann::json::array({{{"tag", "x"}}})), Error);
}

// In-process stand-in for an OpenAI-compatible endpoint.
class StubServer {
 public:
  explicit StubServer(httplib::Server::Handler handler) {
    server_.Post("/v1/chat/completions", std::move(handler));
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer() {
    server_.stop();
    thread_.join();
  }
  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

RemoteConfig remote_config(const std::string& url) {
  RemoteConfig c;
  c.base_url = url;
  c.model = "stub-model";
  c.api_key = "secret";
  c.timeout_seconds = 5;
  return c;
}

TEST(RemoteBackendTest, SendsChatCompletionAndParsesReply) {
  nlohmann::json seen;
  std::string auth;
  StubServer stub([&](const httplib::Request& req, httplib::Response& res) {
    seen = nlohmann::json::parse(req.body);
    auth = req.get_header_value("Authorization");
    res.set_content(R"({"choices":[{"message":{"content":"{\"question\":\"hi\"}"}}],
                        "usage":{"prompt_tokens":7,"completion_tokens":3}})",
                    "application/json");
  });
  Gateway gw(std::make_shared<RemoteBackend>(remote_config(stub.base_url())));
  auto req = question_request();
  req.effort = ReasoningEffort::kHigh;
  const auto r = gw.complete(req);
  EXPECT_EQ(r.parsed.at("question"), "hi");
  EXPECT_EQ(r.usage.prompt_tokens, 7);
  EXPECT_EQ(r.usage.completion_tokens, 3);
  EXPECT_EQ(auth, "Bearer secret");
  EXPECT_EQ(seen.at("model"), "stub-model");
  EXPECT_EQ(seen.at("reasoning_effort"), "high");
  EXPECT_EQ(seen.at("messages")[0].at("role"), "system");
  EXPECT_EQ(seen.at("messages")[1].at("content"), "ask something");
}

TEST(RemoteBackendTest, MapsHttpFailures) {
  int status = 401;
  StubServer stub([&](const httplib::Request&, httplib::Response& res) {
    res.status = status;
    res.set_content(R"({"error":"x"})", "application/json");
  });
  RemoteBackend backend(remote_config(stub.base_url()));
  auto code_of = [&] {
    try {
      backend.send(question_request());
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kIo;
  };
  EXPECT_EQ(code_of(), ErrorCode::kAuthentication);
  status = 500;
  EXPECT_EQ(code_of(), ErrorCode::kUpstream);
  status = 200;
  EXPECT_EQ(code_of(), ErrorCode::kUpstream);
}

TEST(RemoteBackendTest, ConnectionRefusedIsNetworkError) {
  // Nothing listens on port 1 of the loopback interface.
  auto config = remote_config("http://127.0.0.1:1/v1");
  config.timeout_seconds = 2;
  RemoteBackend backend(config);
  try {
    backend.send(question_request());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNetwork);
  }
}

TEST(RemoteBackendTest, RequiresSchemeInBaseUrl) {
  EXPECT_THROW(RemoteBackend(remote_config("localhost:8080")), Error);
}

}  // namespace
}  // namespace btr::llm

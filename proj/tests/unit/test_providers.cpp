// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#include <gtest/gtest.h>

#include <httplib.h>

#include <thread>

#include "fixtures.hpp"
#include "surveysim/http_provider.hpp"
#include "surveysim/mock_provider.hpp"
#include "surveysim/prompt.hpp"

using namespace surveysim;
using namespace std::chrono_literals;

namespace {

PromptPayload payload(const std::string& agent, const std::string& question,
                      AnswerSchema schema = AnswerSchema::likert(1, 7)) {
  PromptPayload p;
  p.system_text = "You are a person.";
  p.user_text = "How are you?";
  p.model_params.model_name = "m";
  p.estimated_tokens = 12;
  p.job = {agent, question};
  p.answer_schema = std::move(schema);
  return p;
}

std::string label(const ProviderOutcome& o) {
  if (const auto* e = std::get_if<ProviderError>(&o)) return std::string(to_string(e->kind));
  return std::get<ProviderResult>(o).text;
}

}  // namespace

TEST(MockProvider, SameSeedSameReplies) {
  MockScript script;
  script.failure_rate = 0.3;
  script.malformed_rate = 0.3;
  auto a = make_mock(script, 5);
  auto b = make_mock(script, 5);
  for (int i = 0; i < 50; ++i) {
    const auto p = payload("a" + std::to_string(i % 7), "q" + std::to_string(i % 3));
    EXPECT_EQ(label(a->complete(p, {})), label(b->complete(p, {})));
  }
  EXPECT_EQ(a->transcript(), b->transcript());
}

TEST(MockProvider, ReplyDependsOnJobAndCallIndexNotArrivalOrder) {
  MockScript script;
  script.failure_rate = 0.5;
  auto forward = make_mock(script, 9);
  auto backward = make_mock(script, 9);
  std::map<JobId, std::string> f, b;
  for (int i = 0; i < 20; ++i) f[{"a" + std::to_string(i), "q0"}] = label(forward->complete(payload("a" + std::to_string(i), "q0"), {}));
  for (int i = 19; i >= 0; --i) b[{"a" + std::to_string(i), "q0"}] = label(backward->complete(payload("a" + std::to_string(i), "q0"), {}));
  EXPECT_EQ(f, b);
}

TEST(MockProvider, FailureRateExtremes) {
  MockScript always;
  always.failure_rate = 1.0;
  MockScript never;
  auto fail = make_mock(always, 1);
  auto pass = make_mock(never, 1);
  for (int i = 0; i < 100; ++i) {
    const auto p = payload("a" + std::to_string(i), "q0");
    EXPECT_EQ(label(fail->complete(p, {})), "transient");
    const auto out = pass->complete(p, {});
    ASSERT_TRUE(std::holds_alternative<ProviderResult>(out));
    EXPECT_TRUE(std::holds_alternative<ParsedAnswer>(parse_response(std::get<ProviderResult>(out).text, p.answer_schema)));
  }
}

TEST(MockProvider, ScriptedSequenceRepeatsItsLastEntry) {
  MockScript script;
  script.responses[{"a0", "q0"}] = {ProviderError::rate_limit(5s), ProviderError::transient("x"), std::string("answer: 3")};
  auto mock = make_mock(script, 1);
  const auto p = payload("a0", "q0");
  EXPECT_EQ(label(mock->complete(p, {})), "rate_limit");
  EXPECT_EQ(label(mock->complete(p, {})), "transient");
  EXPECT_EQ(label(mock->complete(p, {})), "answer: 3");
  EXPECT_EQ(label(mock->complete(p, {})), "answer: 3");
  EXPECT_EQ(mock->call_count(), 4);
}

TEST(MockProvider, UsageIsReported) {
  auto mock = make_mock({}, 1);
  const auto out = std::get<ProviderResult>(mock->complete(payload("a0", "q0"), {}));
  EXPECT_EQ(out.usage.input_tokens, 12);
  EXPECT_EQ(out.usage.output_tokens, estimate_tokens(out.text));
}

TEST(MockProvider, LatencyUsesTheClock) {
  SimulatedClock clock;
  MockScript script;
  script.latency_min = 2s;
  script.latency_max = 2s;
  auto mock = make_mock(script, 1, &clock);
  const auto start = clock.now();
  {
    ClockHold hold(clock);
    (void)mock->complete(payload("a0", "q0"), {});
  }
  EXPECT_EQ(clock.now() - start, Duration(2s));
}

TEST(MockScriptJson, ParsesScriptsAndRejectsBadOnes) {
  const auto script = parse_mock_script(R"({"failure_rate": 0.1, "responses": {
      "a0/q1": [{"error": "rate_limit", "retry_after": 5}, "answer: 2"]}})");
  EXPECT_EQ(script.failure_rate, 0.1);
  const auto& seq = script.responses.at({"a0", "q1"});
  ASSERT_EQ(seq.size(), 2u);
  EXPECT_EQ(std::get<ProviderError>(seq[0]).retry_after, Duration(5s));
  EXPECT_THROW((void)parse_mock_script(R"({"failure_rate": 2})"), ValidationError);
  EXPECT_THROW((void)parse_mock_script(R"({"responses": {"nojob": ["x"]}})"), ValidationError);
}

TEST(HttpClassification, EveryStatusMapsToExactlyOneOutcome) {
  const std::string good = R"({"choices":[{"message":{"content":"answer: 1"}}],"usage":{"prompt_tokens":3,"completion_tokens":4}})";
  for (int status = 100; status < 600; ++status) {
    const auto out = classify_http_response(status, std::nullopt, good);
    if (status >= 200 && status < 300) {
      ASSERT_TRUE(std::holds_alternative<ProviderResult>(out)) << status;
      EXPECT_EQ(std::get<ProviderResult>(out).usage, (TokenUsage{3, 4}));
      continue;
    }
    ASSERT_TRUE(std::holds_alternative<ProviderError>(out)) << status;
    const auto kind = std::get<ProviderError>(out).kind;
    if (status == 429) {
      EXPECT_EQ(kind, ProviderErrorKind::rate_limit);
    } else if (status >= 500 || status < 200 || status == 408 || status == 409 || status == 425) {
      EXPECT_EQ(kind, ProviderErrorKind::transient) << status;
    } else {
      EXPECT_EQ(kind, ProviderErrorKind::fatal) << status;
    }
  }
}

TEST(HttpClassification, RetryAfterAndQuota) {
  const auto limited = std::get<ProviderError>(classify_http_response(429, "7", "{}"));
  EXPECT_EQ(limited.retry_after, Duration(7s));
  const auto dated = std::get<ProviderError>(classify_http_response(429, "Wed, 21 Oct 2015 07:28:00 GMT", "{}"));
  EXPECT_FALSE(dated.retry_after.has_value());
  const auto quota = classify_http_response(429, std::nullopt, R"({"error":{"code":"insufficient_quota"}})");
  EXPECT_EQ(std::get<ProviderError>(quota).kind, ProviderErrorKind::fatal);
  EXPECT_EQ(std::get<ProviderError>(classify_http_response(200, std::nullopt, "<html>")).kind,
            ProviderErrorKind::transient);
}

TEST(HttpProvider, MissingCredentialsAreFatalWithoutANetworkCall) {
  ChatCompletionsProvider provider("http://127.0.0.1:9");
  const auto out = provider.complete(payload("a0", "q0"), Credentials{});
  ASSERT_TRUE(std::holds_alternative<ProviderError>(out));
  EXPECT_EQ(std::get<ProviderError>(out).kind, ProviderErrorKind::fatal);
}

TEST(HttpProvider, TalksToACompatibleEndpoint) {
  httplib::Server server;
  std::string seen_auth;
  nlohmann::json seen_body;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    seen_body = nlohmann::json::parse(req.body);
    res.set_content(R"({"choices":[{"message":{"content":"answer: 4"}}],"usage":{"prompt_tokens":9,"completion_tokens":2}})",
                    "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  ChatCompletionsProvider provider("http://127.0.0.1:" + std::to_string(port), 5s);
  const auto out = provider.complete(payload("a0", "q0"), Credentials{"sk-test"});
  server.stop();
  t.join();

  ASSERT_TRUE(std::holds_alternative<ProviderResult>(out)) << std::get<ProviderError>(out).detail;
  EXPECT_EQ(std::get<ProviderResult>(out).text, "answer: 4");
  EXPECT_EQ(seen_auth, "Bearer sk-test");
  EXPECT_EQ(seen_body["messages"][0]["role"], "system");
  EXPECT_EQ(seen_body["messages"][1]["content"], "How are you?");
  EXPECT_FALSE(seen_body.contains("job"));
}

TEST(HttpProvider, UnreachableEndpointIsTransient) {
  ChatCompletionsProvider provider("http://127.0.0.1:1", 2s);
  const auto out = provider.complete(payload("a0", "q0"), Credentials{"k"});
  ASSERT_TRUE(std::holds_alternative<ProviderError>(out));
  EXPECT_EQ(std::get<ProviderError>(out).kind, ProviderErrorKind::transient);
}

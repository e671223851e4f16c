// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#include <gtest/gtest.h>

#include <httplib.h>

#include "fixtures.hpp"
#include "surveysim/http_api.hpp"
#include "surveysim/service.hpp"

using namespace surveysim;
using namespace std::chrono_literals;
using nlohmann::json;

namespace {

class HttpApiTest : public ::testing::Test {
 protected:
  void SetUp() override {
    ServiceOptions o;
    o.store = &store_;
    o.metrics_interval = 10ms;
    service_ = std::make_unique<RunService>(o);
    api_ = std::make_unique<HttpApi>(*service_);
    port_ = api_->start();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    client_->set_read_timeout(10, 0);
  }
  void TearDown() override {
    api_->stop();
    service_->wait_all();
  }

  std::string register_and_login(const std::string& login) {
    EXPECT_EQ(post("/auth/register", {{"login", login}, {"secret", "pw"}})->status, 201);
    auto res = post("/auth/login", {{"login", login}, {"secret", "pw"}});
    EXPECT_EQ(res->status, 200);
    return json::parse(res->body).at("token").get<std::string>();
  }

  httplib::Headers auth(const std::string& token) { return {{"Authorization", "Bearer " + token}}; }

  httplib::Result post(const std::string& path, const json& body, const std::string& token = {}) {
    return client_->Post(path, token.empty() ? httplib::Headers{} : auth(token), body.dump(), "application/json");
  }

  httplib::Result get(const std::string& path, const std::string& token) { return client_->Get(path, auth(token)); }

  std::string upload_survey(const std::string& token, std::size_t questions) {
    httplib::MultipartFormDataItems items = {
        {"file", serialize_survey(surveysim::testing::demo_survey(questions), SurveyFormat::delimited_table),
         "survey.csv", "text/csv"}};
    auto res = client_->Post("/uploads", auth(token), items);
    EXPECT_EQ(res->status, 201) << res->body;
    return json::parse(res->body).at("upload_id").get<std::string>();
  }

  json start_body(const std::string& survey, std::int64_t agents, std::int64_t concurrency = 2) {
    auto c = surveysim::testing::demo_config(agents);
    c.max_concurrency = concurrency;
    return {{"config", c}, {"survey_upload_id", survey}};
  }

  std::string wait_for_terminal(const std::string& token, const std::string& run_id) {
    for (int i = 0; i < 500; ++i) {
      auto res = get("/runs/" + run_id, token);
      const std::string state = json::parse(res->body).at("state").get<std::string>();
      if (state != "running" && state != "cancelling") return state;
      std::this_thread::sleep_for(10ms);
    }
    return "timeout";
  }

  Store store_{StoreOptions{{}, HashCost::minimum, std::chrono::hours(1), nullptr}};
  std::unique_ptr<RunService> service_;
  std::unique_ptr<HttpApi> api_;
  std::unique_ptr<httplib::Client> client_;
  int port_ = 0;
};

}  // namespace

TEST_F(HttpApiTest, AuthenticationStatusCodes) {
  register_and_login("ada");
  EXPECT_EQ(post("/auth/register", {{"login", "ada"}, {"secret", "x"}})->status, 409);
  EXPECT_EQ(post("/auth/login", {{"login", "ada"}, {"secret", "wrong"}})->status, 401);
  EXPECT_EQ(post("/auth/login", {{"login", "nobody"}, {"secret", "wrong"}})->status, 401);
  EXPECT_EQ(client_->Get("/runs")->status, 401);
  EXPECT_EQ(get("/runs", "not-a-token")->status, 401);
  EXPECT_EQ(client_->Post("/auth/register", "[1,2", "application/json")->status, 422);
}

TEST_F(HttpApiTest, RunLifecycleOverHttp) {
  const auto token = register_and_login("ada");
  const auto survey = upload_survey(token, 3);
  auto started = post("/runs", start_body(survey, 4), token);
  ASSERT_EQ(started->status, 202) << started->body;
  const std::string run_id = json::parse(started->body).at("run_id");

  EXPECT_EQ(wait_for_terminal(token, run_id), "completed");
  const json detail = json::parse(get("/runs/" + run_id, token)->body);
  EXPECT_EQ(detail["metrics"]["completed"], 12);
  EXPECT_EQ(detail["metrics"]["total_jobs"], 12);

  const auto list = json::parse(get("/runs", token)->body);
  ASSERT_EQ(list["runs"].size(), 1u);

  auto csv = get("/runs/" + run_id + "/results?format=csv", token);
  EXPECT_EQ(csv->status, 200);
  EXPECT_EQ(csv->body, service_->download(1, run_id, "csv"));
  EXPECT_EQ(std::count(csv->body.begin(), csv->body.end(), '\n'), 13);
  EXPECT_EQ(get("/runs/" + run_id + "/results?format=jsonl", token)->body, service_->download(1, run_id, "jsonl"));
  EXPECT_EQ(get("/runs/" + run_id + "/results?format=manifest", token)->status, 200);
  EXPECT_EQ(get("/runs/" + run_id + "/results?format=xml", token)->status, 422);

  EXPECT_EQ(post("/runs/" + run_id + "/resume", json::object(), token)->status, 409);
  EXPECT_EQ(post("/runs/" + run_id + "/cancel", json::object(), token)->status, 409);
  EXPECT_EQ(get("/runs/run-missing", token)->status, 404);
}

TEST_F(HttpApiTest, ValidationErrorsListIssues) {
  const auto token = register_and_login("ada");
  const auto survey = upload_survey(token, 1);
  auto body = start_body(survey, 2);
  body["config"]["max_concurrency"] = 0;
  auto res = post("/runs", body, token);
  ASSERT_EQ(res->status, 422);
  const json err = json::parse(res->body);
  ASSERT_EQ(err["issues"].size(), 1u);
  EXPECT_EQ(err["issues"][0]["subject"], "max_concurrency");

  httplib::MultipartFormDataItems bad = {{"file", "question_id,text\n", "s.csv", "text/csv"}};
  EXPECT_EQ(client_->Post("/uploads", auth(token), bad)->status, 422);
}

TEST_F(HttpApiTest, OtherUsersGetForbidden) {
  const auto ada = register_and_login("ada");
  const auto bob = register_and_login("bob");
  const auto survey = upload_survey(ada, 1);
  const std::string run_id = json::parse(post("/runs", start_body(survey, 1), ada)->body).at("run_id");
  wait_for_terminal(ada, run_id);
  EXPECT_EQ(get("/runs/" + run_id, bob)->status, 403);
  EXPECT_EQ(get("/runs/" + run_id + "/results", bob)->status, 403);
  EXPECT_EQ(get("/runs/" + run_id + "/metrics", bob)->status, 403);
  EXPECT_EQ(post("/runs", start_body(survey, 1), bob)->status, 403);
}

TEST_F(HttpApiTest, MetricsStreamEndsWithAFinalSnapshot) {
  const auto token = register_and_login("ada");
  const auto survey = upload_survey(token, 5);
  auto body = start_body(survey, 20, 4);
  body["mock_script"] = {{"latency_min_ms", 2}, {"latency_max_ms", 5}};
  const std::string run_id = json::parse(post("/runs", body, token)->body).at("run_id");

  std::vector<json> events;
  std::string buffer;
  auto res = client_->Get("/runs/" + run_id + "/metrics", auth(token), [&](const char* data, std::size_t n) {
    buffer.append(data, n);
    std::size_t end;
    while ((end = buffer.find("\n\n")) != std::string::npos) {
      const std::string event = buffer.substr(0, end);
      buffer.erase(0, end + 2);
      const auto data_at = event.find("data: ");
      if (data_at != std::string::npos) events.push_back(json::parse(event.substr(data_at + 6)));
    }
    return true;
  });
  ASSERT_TRUE(res);
  EXPECT_EQ(res->get_header_value("Content-Type"), "text/event-stream");
  ASSERT_FALSE(events.empty());
  EXPECT_TRUE(events.back()["final"].get<bool>());
  EXPECT_EQ(events.back()["completed"], 100);
  for (std::size_t i = 1; i < events.size(); ++i) {
    EXPECT_LE(events[i - 1]["completed"].get<int>(), events[i]["completed"].get<int>());
    EXPECT_FALSE(events[i - 1]["final"].get<bool>());
  }
}

TEST_F(HttpApiTest, DeleteMyDataPurgesRunsButKeepsLogin) {
  const auto token = register_and_login("ada");
  const auto survey = upload_survey(token, 2);
  const std::string run_id = json::parse(post("/runs", start_body(survey, 2), token)->body).at("run_id");
  wait_for_terminal(token, run_id);
  auto res = client_->Delete("/me/data", auth(token));
  ASSERT_EQ(res->status, 200);
  const json report = json::parse(res->body);
  EXPECT_EQ(report["runs"], 1);
  EXPECT_EQ(report["answers"], 4);
  EXPECT_EQ(report["uploads"], 1);
  EXPECT_EQ(get("/runs/" + run_id, token)->status, 404);
  EXPECT_EQ(post("/auth/login", {{"login", "ada"}, {"secret", "pw"}})->status, 200);
  EXPECT_EQ(json::parse(client_->Delete("/me/data", auth(token))->body)["runs"], 0);
}

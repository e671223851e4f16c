// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "surveysim/config.hpp"
#include "surveysim/errors.hpp"

using namespace surveysim;
using surveysim::testing::demo_config;

namespace {
std::vector<std::string> subjects(const ValidationReport& r) {
  std::vector<std::string> out;
  for (const auto& i : r.issues) out.push_back(i.subject);
  return out;
}
}  // namespace

TEST(Config, FixtureIsValid) { EXPECT_TRUE(validate_config(demo_config(10)).ok()); }

TEST(Config, ZeroConcurrencyIsRejectedByName) {
  auto c = demo_config(10);
  c.max_concurrency = 0;
  const auto report = validate_config(c);
  ASSERT_EQ(report.issues.size(), 1u);
  EXPECT_EQ(report.issues[0].subject, "max_concurrency");
  EXPECT_EQ(report.issues[0].message, "must be at least 1");
}

TEST(Config, EveryBadFieldIsListed) {
  auto c = demo_config(0);
  c.provider_id = "nobody";
  c.top_p = 0;
  c.rpm_limit = 0;
  c.retry.max_retries = -1;
  c.retry.jitter_fraction = 2;
  EXPECT_EQ(subjects(validate_config(c)),
            (std::vector<std::string>{"population_size", "provider_id", "top_p", "rpm_limit", "retry.max_retries",
                                      "retry.jitter_fraction"}));
}

TEST(Config, TemperatureOutsideProviderRange) {
  auto c = demo_config(1);
  c.temperature = 2.5;
  EXPECT_EQ(subjects(validate_config(c)), std::vector<std::string>{"temperature"});
}

TEST(Config, SchemaProblemsArePrefixed) {
  auto c = demo_config(1);
  c.profile_schema.attributes[2].low = 95;
  EXPECT_EQ(subjects(validate_config(c)), std::vector<std::string>{"profile_schema.age"});
}

TEST(Config, UnknownTemplatePlaceholder) {
  auto c = demo_config(1);
  c.profile_template = "You are <age> and <height>.";
  const auto report = validate_config(c);
  ASSERT_EQ(report.issues.size(), 1u);
  EXPECT_EQ(report.issues[0].message, "unknown placeholder <height>");
}

TEST(Config, JsonRoundTripPreservesEverything) {
  auto c = demo_config(25, 99);
  c.retry.base_delay = std::chrono::milliseconds(1500);
  c.pricing = {1e-6, 2e-6};
  c.profile_template = "<gender>";
  const SimulationConfig back = nlohmann::json(c).get<SimulationConfig>();
  EXPECT_EQ(back, c);
  EXPECT_EQ(config_hash(back), config_hash(c));
}

TEST(Config, HashChangesWithAnyField) {
  const auto a = demo_config(10);
  auto b = a;
  b.temperature = 0.71;
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 64u);
}

TEST(Config, ParseFillsDefaultsAndReportsSyntax) {
  const auto c = parse_config(R"({"population_size": 3, "profile_schema": {"attributes": [
      {"name": "x", "kind": "categorical", "options": [{"label": "a", "weight": 1}]}]}})");
  EXPECT_EQ(c.population_size, 3);
  EXPECT_EQ(c.max_concurrency, 4);
  EXPECT_EQ(c.retry.max_retries, 3);
  EXPECT_EQ(c.retry.base_delay, std::chrono::seconds(1));
  EXPECT_THROW((void)parse_config("{not json"), ValidationError);
  EXPECT_THROW((void)parse_config(R"({"profile_schema": {}})"), ValidationError);
}

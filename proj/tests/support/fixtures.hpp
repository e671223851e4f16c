// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "surveysim/config.hpp"
#include "surveysim/jobs.hpp"
#include "surveysim/profile.hpp"
#include "surveysim/survey.hpp"

namespace surveysim::testing {

/// Gender, orientation, age band and Big 5, with one forbid constraint
/// ruling out "male" together with "lesbian".
inline ProfileSchema demo_schema() {
  ProfileSchema s;
  s.attributes.push_back({"gender", AttributeKind::categorical, {{"female", 0.5}, {"male", 0.45}, {"nonbinary", 0.05}}, 0, 0, ""});
  s.attributes.push_back({"orientation",
                          AttributeKind::categorical,
                          {{"heterosexual", 0.8}, {"gay", 0.08}, {"lesbian", 0.07}, {"bisexual", 0.05}},
                          0,
                          0,
                          ""});
  s.attributes.push_back({"age", AttributeKind::integer_range, {}, 18, 90, "years"});
  s.attributes.push_back({"personality", AttributeKind::big5, {}, 0, 0, ""});
  Constraint forbid;
  forbid.kind = ConstraintKind::forbid;
  forbid.terms = {{"gender", std::string("male")}, {"orientation", std::string("lesbian")}};
  s.constraints.push_back(forbid);
  return s;
}

/// `n` questions cycling through every answer kind.
inline SurveySpec demo_survey(std::size_t n) {
  SurveySpec survey;
  for (std::size_t i = 0; i < n; ++i) {
    SurveyQuestion q;
    q.question_id = "q" + std::to_string(i);
    switch (i % 5) {
      case 0:
        q.text = "How satisfied are you with public transport where you live?";
        q.answer_schema = AnswerSchema::likert(1, 7);
        break;
      case 1:
        q.text = "Which of these do you use most often?";
        q.answer_schema = AnswerSchema::single_choice({"bus", "train", "bicycle", "car"});
        break;
      case 2:
        q.text = "Which news sources do you read weekly?";
        q.answer_schema = AnswerSchema::multi_choice({"newspaper", "television", "radio", "online"});
        break;
      case 3:
        q.text = "How many hours per week do you spend commuting?";
        q.answer_schema = AnswerSchema::numeric_range(0, 40);
        break;
      default:
        q.text = "Describe your ideal weekend in a sentence.";
        q.answer_schema = AnswerSchema::free_text();
        break;
    }
    survey.questions.push_back(std::move(q));
  }
  return survey;
}

inline SimulationConfig demo_config(std::int64_t agents, std::uint64_t seed = 7) {
  SimulationConfig c;
  c.run_seed = seed;
  c.population_size = agents;
  c.profile_schema = demo_schema();
  c.provider_id = "mock";
  c.model_name = "mock-model";
  c.temperature = 0.7;
  c.max_concurrency = 4;
  c.rpm_limit = 600;
  c.tpm_limit = 1'000'000;
  return c;
}

struct Inputs {
  std::shared_ptr<const std::vector<AgentProfile>> population;
  std::shared_ptr<const SurveySpec> survey;
};

inline Inputs demo_inputs(const SimulationConfig& config, std::size_t questions) {
  return {std::make_shared<const std::vector<AgentProfile>>(
              generate_population(config.profile_schema, static_cast<std::size_t>(config.population_size), config.run_seed)),
          std::make_shared<const SurveySpec>(demo_survey(questions))};
}

}  // namespace surveysim::testing

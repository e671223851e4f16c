// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#include <benchmark/benchmark.h>

#include <memory>

#include "surveysim/jobs.hpp"
#include "surveysim/profile.hpp"
#include "surveysim/survey.hpp"

namespace {

using namespace surveysim;

std::shared_ptr<const std::vector<AgentProfile>> agents(std::size_t n) {
  std::vector<AgentProfile> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i].agent_id = "a" + std::to_string(i);
  return std::make_shared<const std::vector<AgentProfile>>(std::move(v));
}

std::shared_ptr<const SurveySpec> questions(std::size_t n) {
  SurveySpec s;
  for (std::size_t i = 0; i < n; ++i) {
    SurveyQuestion q;
    q.question_id = "q" + std::to_string(i);
    q.text = "Question " + std::to_string(i);
    q.answer_schema = AnswerSchema::likert(1, 5);
    s.questions.push_back(std::move(q));
  }
  return std::make_shared<const SurveySpec>(std::move(s));
}

// Drains the full cross product; the buffer size bounds memory, so the
// per-job cost should not depend on it much.
void BM_DrainStream(benchmark::State& state) {
  const auto pop = agents(2000);
  const auto survey = questions(20);
  const auto buffer = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    JobStream stream(pop, survey, buffer);
    std::size_t n = 0;
    while (auto job = stream.next()) ++n;
    benchmark::DoNotOptimize(n);
  }
  state.SetItemsProcessed(state.iterations() * 2000 * 20);
}
BENCHMARK(BM_DrainStream)->Arg(16)->Arg(256)->Arg(4096);

void BM_DrainResumedStream(benchmark::State& state) {
  const auto pop = agents(2000);
  const auto survey = questions(20);
  auto skip = std::make_shared<JobIdSet>();
  for (std::size_t a = 0; a < 2000; a += 2) {
    for (std::size_t q = 0; q < 20; ++q) skip->insert({"a" + std::to_string(a), "q" + std::to_string(q)});
  }
  for (auto _ : state) {
    JobStream stream(pop, survey, 256, {}, skip);
    std::size_t n = 0;
    while (auto job = stream.next()) ++n;
    benchmark::DoNotOptimize(n);
  }
  state.SetItemsProcessed(state.iterations() * 2000 * 20);
}
BENCHMARK(BM_DrainResumedStream);

}  // namespace

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#include <gtest/gtest.h>

#include <map>
#include <random>

#include "fixtures.hpp"
#include "surveysim/mock_provider.hpp"
#include "surveysim/scheduler.hpp"

using namespace surveysim;
using namespace std::chrono_literals;

namespace {

constexpr const char* kLikertFour = "```answer\nanswer: 4\nreasoning: middling.\n```";

struct Harness {
  SimulationConfig config;
  surveysim::testing::Inputs in;
  SimulatedClock clock;
  MockScript script;
  MemoryAnswerSink answers;
  MemoryCheckpointSink checkpoints;
  std::shared_ptr<MetricsRecorder> metrics;
  SchedulerHooks hooks;
  Scheduler* current = nullptr;
  SchedulerStats stats;
  std::vector<std::pair<TimePoint, JobId>> dispatches;

  Harness(std::int64_t agents, std::size_t questions) : config(surveysim::testing::demo_config(agents)) {
    in = surveysim::testing::demo_inputs(config, questions);
    config.retry.jitter_fraction = 0.0;
  }

  RunManifest run(const JobIdSet& already = {}, std::optional<RunManifest> resume = std::nullopt) {
    auto mock = make_mock(script, config.run_seed, &clock);
    metrics = std::make_shared<MetricsRecorder>("run", static_cast<std::int64_t>(in.population->size() * in.survey->size()),
                                                Pricing{}, clock, static_cast<std::int64_t>(already.size()));
    SchedulerContext ctx;
    ctx.run_id = "run";
    ctx.config = config;
    ctx.provider = mock.get();
    ctx.clock = &clock;
    ctx.answers = &answers;
    ctx.checkpoints = &checkpoints;
    ctx.metrics = metrics;
    ctx.already_completed = already;
    ctx.hooks = hooks;
    auto user_dispatch = hooks.on_dispatch;
    ctx.hooks.on_dispatch = [this, user_dispatch](TimePoint t, const JobId& id, std::int64_t tokens) {
      dispatches.emplace_back(t, id);
      if (user_dispatch) user_dispatch(t, id, tokens);
    };
    Scheduler scheduler(ctx);
    current = &scheduler;
    JobStream stream = resume ? make_resume_stream(*resume, config, in.population, in.survey, already)
                              : JobStream(in.population, in.survey, static_cast<std::size_t>(config.buffer_size));
    RunManifest m = scheduler.run(stream);
    stats = scheduler.stats();
    current = nullptr;
    return m;
  }

  std::vector<TimePoint> dispatch_times(const JobId& id) const {
    std::vector<TimePoint> out;
    for (const auto& [t, j] : dispatches) {
      if (j == id) out.push_back(t);
    }
    return out;
  }
};

JobIdSet all_jobs(const Harness& h) {
  JobIdSet out;
  for (const auto& a : *h.in.population) {
    for (const auto& q : h.in.survey->questions) out.insert({a.agent_id, q.question_id});
  }
  return out;
}

void expect_exact_accounting(const Harness& h, const RunManifest& m) {
  JobIdSet uncompleted;
  for (const auto& u : m.uncompleted) {
    EXPECT_FALSE(m.completed.contains(u.job)) << u.job.to_string();
    EXPECT_TRUE(uncompleted.insert(u.job).second) << "listed twice: " << u.job.to_string();
  }
  JobIdSet both = m.completed;
  both.insert(uncompleted.begin(), uncompleted.end());
  EXPECT_EQ(both, all_jobs(h));
  EXPECT_EQ(h.answers.keys(), m.completed);
}

}  // namespace

TEST(Scheduler, TenJobsAllSucceed) {
  Harness h(2, 5);
  const auto m = h.run();
  EXPECT_EQ(m.status, RunStatus::completed);
  EXPECT_EQ(m.completed.size(), 10u);
  EXPECT_TRUE(m.uncompleted.empty());
  EXPECT_EQ(h.answers.size(), 10u);
  expect_exact_accounting(h, m);
}

TEST(Scheduler, JobFailingEveryAttemptEndsUncompletedWithItsLastError) {
  Harness h(2, 5);
  const JobId seventh{"a1", "q2"};  // row-major index 7
  h.script.responses[seventh] = {ProviderError::transient("upstream reset")};
  const auto m = h.run();
  EXPECT_EQ(m.completed.size(), 9u);
  ASSERT_EQ(m.uncompleted.size(), 1u);
  EXPECT_EQ(m.uncompleted[0].job, seventh);
  EXPECT_EQ(m.uncompleted[0].attempts, h.config.retry.max_retries + 1);
  EXPECT_EQ(m.uncompleted[0].last_error, "transient: upstream reset");
  EXPECT_EQ(m.status, RunStatus::completed_with_failures);
  EXPECT_EQ(h.dispatch_times(seventh).size(), static_cast<std::size_t>(h.config.retry.max_retries + 1));
}

TEST(Scheduler, CancelAfterFourCompletionsLeavesSixNotAttempted) {
  Harness h(2, 5);
  h.config.max_concurrency = 1;
  int done = 0;
  h.hooks.on_step = [&](SchedulerStep s, const JobId&) {
    if (s == SchedulerStep::job_completed && ++done == 4) h.current->cancel();
  };
  const auto m = h.run();
  EXPECT_EQ(m.status, RunStatus::cancelled);
  EXPECT_EQ(m.completed.size(), 4u);
  ASSERT_EQ(m.uncompleted.size(), 6u);
  for (const auto& u : m.uncompleted) {
    EXPECT_EQ(u.last_error, "not-attempted");
    EXPECT_EQ(u.attempts, 0);
  }
  expect_exact_accounting(h, m);
  EXPECT_EQ(h.checkpoints.latest(), m);
}

TEST(Scheduler, FatalErrorAbortsAfterKeepingEarlierAnswers) {
  Harness h(2, 5);
  h.config.max_concurrency = 1;
  h.script.responses[{"a0", "q3"}] = {ProviderError::fatal("invalid credentials")};
  const auto m = h.run();
  EXPECT_EQ(m.status, RunStatus::aborted);
  EXPECT_EQ(m.failure, "fatal: invalid credentials");
  EXPECT_EQ(m.completed.size(), 3u);
  ASSERT_EQ(m.uncompleted.size(), 7u);
  EXPECT_EQ(m.uncompleted[0].job, (JobId{"a0", "q3"}));
  EXPECT_EQ(m.uncompleted[0].attempts, 1);
  expect_exact_accounting(h, m);
}

TEST(Scheduler, RateLimitRetryAfterIsHonoured) {
  Harness h(1, 1);
  const JobId job{"a0", "q0"};
  h.script.responses[job] = {ProviderError::rate_limit(Duration(5s)), std::string(kLikertFour)};
  const auto m = h.run();
  EXPECT_EQ(m.completed.size(), 1u);
  const auto times = h.dispatch_times(job);
  ASSERT_EQ(times.size(), 2u);
  EXPECT_EQ(times[1] - times[0], Duration(5s));
}

TEST(Scheduler, BackoffDelaysDoubleExactlyWithoutJitter) {
  Harness h(1, 1);
  const JobId job{"a0", "q0"};
  h.script.responses[job] = {ProviderError::transient("x"), ProviderError::transient("x"),
                             ProviderError::transient("x"), std::string(kLikertFour)};
  const auto m = h.run();
  EXPECT_EQ(m.completed.size(), 1u);
  const auto t = h.dispatch_times(job);
  ASSERT_EQ(t.size(), 4u);
  EXPECT_EQ(t[1] - t[0], Duration(1s));
  EXPECT_EQ(t[2] - t[1], Duration(2s));
  EXPECT_EQ(t[3] - t[2], Duration(4s));
  EXPECT_EQ(h.answers.records().front().attempts, 4);
}

TEST(Scheduler, MalformedReplyIsRepairedWithoutSpendingRetries) {
  Harness h(1, 1);
  const JobId job{"a0", "q0"};
  h.script.responses[job] = {std::string("I would rather not say."), std::string(kLikertFour)};
  const auto m = h.run();
  ASSERT_EQ(m.completed.size(), 1u);
  const auto r = h.answers.records().front();
  EXPECT_EQ(r.value, "4");
  EXPECT_EQ(r.repairs, 1);
  EXPECT_EQ(r.attempts, 1);
  EXPECT_EQ(h.metrics->snapshot().format_repairs_total, 1);
}

TEST(Scheduler, RepairsAreBounded) {
  Harness h(1, 1);
  h.config.format_repair_attempts = 2;
  h.script.responses[{"a0", "q0"}] = {std::string("no block at all")};
  const auto m = h.run();
  ASSERT_EQ(m.uncompleted.size(), 1u);
  EXPECT_EQ(m.uncompleted[0].last_error.rfind("format: ", 0), 0u);
  EXPECT_EQ(h.dispatches.size(), 3u);  // original plus two repairs
}

TEST(Scheduler, OversizedPromptIsInfeasibleAndNeverDispatched) {
  Harness h(1, 2);
  h.config.tpm_limit = 5;
  const auto m = h.run();
  EXPECT_TRUE(h.dispatches.empty());
  ASSERT_EQ(m.uncompleted.size(), 2u);
  EXPECT_EQ(m.uncompleted[0].last_error.rfind("infeasible-request", 0), 0u);
}

TEST(Scheduler, InFlightNeverExceedsConcurrency) {
  Harness h(10, 3);
  h.config.max_concurrency = 3;
  h.script.latency_min = 100ms;
  h.script.latency_max = 2s;
  const auto m = h.run();
  EXPECT_EQ(m.completed.size(), 30u);
  EXPECT_EQ(h.stats.peak_in_flight, 3);
}

TEST(Scheduler, CheckpointsEveryTwentyFiveCompletionsAndAtTheEnd) {
  Harness h(12, 5);
  const auto m = h.run();
  EXPECT_EQ(m.completed.size(), 60u);
  EXPECT_EQ(h.checkpoints.writes(), 3u);
  EXPECT_EQ(h.checkpoints.latest(), m);
}

TEST(Scheduler, AnswerIsSavedBeforeTheJobCountsAsCompleted) {
  Harness h(3, 3);
  std::map<JobId, std::vector<SchedulerStep>> steps;
  h.hooks.on_step = [&](SchedulerStep s, const JobId& id) { steps[id].push_back(s); };
  (void)h.run();
  for (const auto& [id, seq] : steps) {
    if (id.agent_id.empty()) continue;
    auto saved = std::find(seq.begin(), seq.end(), SchedulerStep::answer_saved);
    auto completed = std::find(seq.begin(), seq.end(), SchedulerStep::job_completed);
    ASSERT_NE(saved, seq.end());
    EXPECT_LT(saved, completed) << id.to_string();
  }
}

TEST(Scheduler, MetricsEndBalanced) {
  Harness h(4, 5);
  h.script.failure_rate = 0.3;
  const auto m = h.run();
  const auto s = h.metrics->snapshot();
  EXPECT_TRUE(s.final);
  EXPECT_EQ(s.in_flight, 0);
  EXPECT_EQ(s.completed, static_cast<std::int64_t>(m.completed.size()));
  EXPECT_EQ(s.completed + s.failed_exhausted + s.pending, 20);
  EXPECT_GT(s.retries_total, 0);
}

TEST(Scheduler, CrashThenResumeCompletesWithoutDuplicates) {
  for (int crash_at : {1, 7, 23}) {
    Harness h(5, 4);
    int steps = 0;
    h.hooks.on_step = [&](SchedulerStep, const JobId&) {
      if (++steps == crash_at) throw std::runtime_error("crash");
    };
    EXPECT_THROW((void)h.run(), std::runtime_error);
    h.hooks.on_step = nullptr;
    RunManifest resume_from;
    if (auto latest = h.checkpoints.latest()) {
      resume_from = *latest;
    } else {
      resume_from.config_hash = config_hash(h.config);
    }
    JobIdSet already = resume_from.completed;
    const auto saved = h.answers.keys();
    already.insert(saved.begin(), saved.end());
    const auto m = h.run(already, resume_from);
    EXPECT_EQ(m.status, RunStatus::completed);
    EXPECT_EQ(h.answers.size(), 20u);
    EXPECT_EQ(h.answers.save_calls(), 20u) << "a completed job was dispatched again";
    expect_exact_accounting(h, m);
  }
}

TEST(SchedulerProperty, AccountingIsExactUnderRandomFaults) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 25; ++trial) {
    Harness h(std::uniform_int_distribution<std::int64_t>(1, 8)(rng), std::uniform_int_distribution<std::size_t>(1, 6)(rng));
    h.config.run_seed = rng();
    h.config.max_concurrency = std::uniform_int_distribution<std::int64_t>(1, 6)(rng);
    h.config.rpm_limit = std::uniform_int_distribution<std::int64_t>(5, 100)(rng);
    h.config.retry.max_retries = std::uniform_int_distribution<std::int64_t>(0, 3)(rng);
    h.config.format_repair_attempts = std::uniform_int_distribution<std::int64_t>(0, 2)(rng);
    h.script.failure_rate = std::uniform_real_distribution<double>(0, 0.6)(rng);
    h.script.malformed_rate = std::uniform_real_distribution<double>(0, 0.6)(rng);
    h.script.latency_max = std::chrono::milliseconds(std::uniform_int_distribution<int>(0, 3000)(rng));
    const auto m = h.run();
    expect_exact_accounting(h, m);
    EXPECT_LE(h.stats.peak_in_flight, h.config.max_concurrency);
    for (const auto& u : m.uncompleted) EXPECT_LE(u.attempts, h.config.retry.max_retries + 1);
    for (const auto& r : h.answers.records()) EXPECT_LE(r.attempts, h.config.retry.max_retries + 1);
  }
}

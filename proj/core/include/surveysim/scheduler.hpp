// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include "surveysim/clock.hpp"
#include "surveysim/config.hpp"
#include "surveysim/jobs.hpp"
#include "surveysim/manifest.hpp"
#include "surveysim/metrics.hpp"
#include "surveysim/provider.hpp"
#include "surveysim/rate_limiter.hpp"
#include "surveysim/records.hpp"

namespace surveysim {

/// Points in the coordinator's progress at which the step hook runs.
enum class SchedulerStep { dispatched, answer_saved, job_completed, job_exhausted, checkpoint_written };

[[nodiscard]] std::string_view to_string(SchedulerStep step);

struct SchedulerHooks {
  /// Runs on the coordinator thread. An exception thrown here propagates out
  /// of run() after in-flight requests have returned, which is how tests
  /// simulate a crash at an exact point.
  std::function<void(SchedulerStep, const JobId&)> on_step;
  /// Observes every grant: dispatch time, job and estimated tokens.
  std::function<void(TimePoint, const JobId&, std::int64_t)> on_dispatch;
};

struct SchedulerStats {
  std::size_t peak_materialized = 0;
  std::int64_t peak_in_flight = 0;
  std::int64_t dispatches = 0;
};

inline constexpr std::int64_t kCheckpointEvery = 25;

struct SchedulerContext {
  std::string run_id;
  SimulationConfig config;
  Provider* provider = nullptr;
  Credentials credentials;
  Clock* clock = nullptr;
  AnswerSink* answers = nullptr;
  CheckpointSink* checkpoints = nullptr;
  /// Optional.
  std::shared_ptr<MetricsRecorder> metrics;
  /// Jobs finished by an earlier attempt at the same run; carried into the
  /// manifest so it always covers the whole cross product.
  JobIdSet already_completed;
  SchedulerHooks hooks;
};

/// Drives a job stream through a provider. One coordinator thread (the
/// caller of run()) owns the stream, the manifest and the sinks; a pool of
/// max_concurrency workers performs provider calls and hands outcomes back
/// through a mailbox.
class Scheduler {
 public:
  explicit Scheduler(SchedulerContext context);
  ~Scheduler();
  Scheduler(const Scheduler&) = delete;
  Scheduler& operator=(const Scheduler&) = delete;

  RunManifest run(JobStream& jobs);

  /// Safe from any thread. In-flight requests finish; nothing new starts.
  void cancel();

  [[nodiscard]] SchedulerStats stats() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace surveysim

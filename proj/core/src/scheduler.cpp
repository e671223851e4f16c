// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#include "surveysim/scheduler.hpp"

#include <algorithm>
#include <condition_variable>
#include <deque>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>
#include <vector>

#include "surveysim/errors.hpp"
#include "surveysim/prompt.hpp"
#include "surveysim/retry.hpp"
#include "surveysim/rng.hpp"

namespace surveysim {

std::string_view to_string(SchedulerStep step) {
  switch (step) {
    case SchedulerStep::dispatched: return "dispatched";
    case SchedulerStep::answer_saved: return "answer-saved";
    case SchedulerStep::job_completed: return "job-completed";
    case SchedulerStep::job_exhausted: return "job-exhausted";
    case SchedulerStep::checkpoint_written: return "checkpoint-written";
  }
  return "?";
}

namespace {

class WorkerPool {
 public:
  explicit WorkerPool(std::size_t size) {
    threads_.reserve(size);
    for (std::size_t i = 0; i < size; ++i) threads_.emplace_back([this] { loop(); });
  }

  // Runs every queued task before returning.
  ~WorkerPool() {
    {
      std::lock_guard lock(mutex_);
      stopping_ = true;
    }
    cv_.notify_all();
    for (auto& t : threads_) t.join();
  }

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  void submit(std::function<void()> task) {
    {
      std::lock_guard lock(mutex_);
      queue_.push_back(std::move(task));
    }
    cv_.notify_one();
  }

 private:
  void loop() {
    while (true) {
      std::function<void()> task;
      {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
        if (queue_.empty()) return;
        task = std::move(queue_.front());
        queue_.pop_front();
      }
      task();
    }
  }

  std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<std::function<void()>> queue_;
  std::vector<std::thread> threads_;
  bool stopping_ = false;
};

struct Delivery {
  std::uint64_t slot;
  ProviderOutcome outcome;
};

class Mailbox {
 public:
  void post(Delivery d) {
    std::lock_guard lock(mutex_);
    items_.push_back(std::move(d));
  }
  std::deque<Delivery> take() {
    std::lock_guard lock(mutex_);
    return std::exchange(items_, {});
  }
  bool empty() const {
    std::lock_guard lock(mutex_);
    return items_.empty();
  }

 private:
  mutable std::mutex mutex_;
  std::deque<Delivery> items_;
};

// A job the coordinator has pulled from the stream and not yet settled.
struct ActiveJob {
  RequestJob job;
  PromptPayload original;
  PromptPayload next_payload;
  bool next_is_repair = false;
  std::int64_t repairs = 0;
  TokenUsage usage;
  std::string last_error;
  std::uint64_t grant = 0;
};

struct Unfinished {
  std::size_t agent_index;
  std::size_t question_index;
  UncompletedJob entry;
};

}  // namespace

struct Scheduler::Impl {
  SchedulerContext ctx;
  RateLimiter limiter;
  std::atomic<bool> cancel_requested{false};

  mutable std::mutex stats_mutex;
  SchedulerStats stats;

  explicit Impl(SchedulerContext c)
      : ctx(std::move(c)), limiter(RateBudget{ctx.config.rpm_limit, ctx.config.tpm_limit}) {}

  RunManifest run(JobStream& jobs);
};

Scheduler::Scheduler(SchedulerContext context) : impl_(std::make_unique<Impl>(std::move(context))) {
  if (impl_->ctx.provider == nullptr || impl_->ctx.clock == nullptr || impl_->ctx.answers == nullptr ||
      impl_->ctx.checkpoints == nullptr) {
    throw std::invalid_argument("scheduler needs a provider, a clock, an answer sink and a checkpoint sink");
  }
}

Scheduler::~Scheduler() = default;

RunManifest Scheduler::run(JobStream& jobs) { return impl_->run(jobs); }

void Scheduler::cancel() {
  impl_->cancel_requested = true;
  impl_->ctx.clock->notify();
}

SchedulerStats Scheduler::stats() const {
  std::lock_guard lock(impl_->stats_mutex);
  return impl_->stats;
}

RunManifest Scheduler::Impl::run(JobStream& jobs) {
  const SimulationConfig& config = ctx.config;
  Clock& clock = *ctx.clock;
  MetricsRecorder* metrics = ctx.metrics.get();
  const auto capacity = static_cast<std::size_t>(std::max<std::int64_t>(1, config.max_concurrency));
  const std::string hash = config_hash(config);

  RunManifest manifest;
  manifest.run_id = ctx.run_id;
  manifest.config_hash = hash;
  manifest.directive_version = std::string(kDirectiveVersion);
  manifest.total_jobs = jobs.total();
  manifest.completed = ctx.already_completed;

  std::vector<Unfinished> unfinished;
  std::int64_t completions_since_checkpoint = 0;

  auto step = [&](SchedulerStep s, const JobId& id) {
    if (ctx.hooks.on_step) ctx.hooks.on_step(s, id);
  };
  auto snapshot_manifest = [&] {
    RunManifest m = manifest;
    std::sort(unfinished.begin(), unfinished.end(), [](const Unfinished& a, const Unfinished& b) {
      return std::tie(a.agent_index, a.question_index) < std::tie(b.agent_index, b.question_index);
    });
    for (const auto& u : unfinished) m.uncompleted.push_back(u.entry);
    m.cursor = jobs.cursor();
    return m;
  };
  auto checkpoint = [&](const JobId& id) {
    ctx.checkpoints->write(snapshot_manifest());
    completions_since_checkpoint = 0;
    step(SchedulerStep::checkpoint_written, id);
  };
  auto set_aside = [&](const RequestJob& job, std::string error, std::int64_t attempts) {
    unfinished.push_back({job.agent_index(), job.question_index(), {job.id(), std::move(error), attempts}});
  };
  auto exhaust = [&](ActiveJob& a, bool was_in_flight) {
    a.job.transition(JobStatus::exhausted);
    set_aside(a.job, a.last_error, a.job.attempt());
    if (metrics) metrics->on_exhausted(was_in_flight);
    step(SchedulerStep::job_exhausted, a.job.id());
  };

  // Destruction order matters: the hold goes first so that a simulated clock
  // can keep advancing while the pool drains, then the pool joins its
  // workers, and the mailbox they post into goes last.
  Mailbox mailbox;
  WorkerPool pool(capacity);
  ClockHold coordinator_hold(clock);

  std::map<std::uint64_t, ActiveJob> in_flight;
  std::map<std::pair<TimePoint, std::uint64_t>, ActiveJob> waiting;
  std::uint64_t next_seq = 0;
  std::uint64_t next_slot = 0;
  bool aborted = false;
  std::string abort_reason;

  auto active_count = [&] { return in_flight.size() + waiting.size(); };
  auto stopping = [&] { return aborted || cancel_requested.load(); };
  auto enqueue = [&](ActiveJob a, TimePoint due) { waiting.emplace(std::make_pair(due, next_seq++), std::move(a)); };

  auto handle = [&](Delivery d) {
    auto node = in_flight.extract(d.slot);
    ActiveJob a = std::move(node.mapped());
    const TimePoint now = clock.now();

    if (auto* result = std::get_if<ProviderResult>(&d.outcome)) {
      limiter.reconcile(a.grant, result->usage.total());
      a.usage.input_tokens += result->usage.input_tokens;
      a.usage.output_tokens += result->usage.output_tokens;
      if (metrics) metrics->on_usage(result->usage);

      ParseResult parsed = parse_response(result->text, a.original.answer_schema);
      if (auto* answer = std::get_if<ParsedAnswer>(&parsed)) {
        AnswerRecord record;
        record.run_id = ctx.run_id;
        record.job = a.job.id();
        record.agent_index = a.job.agent_index();
        record.question_index = a.job.question_index();
        record.value = format_answer_value(answer->value);
        record.reasoning = answer->reasoning;
        record.raw = result->text;
        record.usage = a.usage;
        record.attempts = a.job.attempt();
        record.repairs = a.repairs;
        record.config_hash = hash;
        record.directive_version = std::string(kDirectiveVersion);
        record.created_at_ms = to_millis(now);
        ctx.answers->save(record);
        step(SchedulerStep::answer_saved, a.job.id());

        a.job.transition(JobStatus::completed);
        manifest.completed.insert(a.job.id());
        if (metrics) metrics->on_completed();
        step(SchedulerStep::job_completed, a.job.id());
        if (++completions_since_checkpoint >= kCheckpointEvery) checkpoint(a.job.id());
        return;
      }

      const auto& error = std::get<FormatError>(parsed);
      a.last_error = "format: " + error.describe();
      if (a.repairs < config.format_repair_attempts && !stopping()) {
        ++a.repairs;
        a.next_payload = build_repair_prompt(a.original, result->text, error, a.repairs);
        a.next_is_repair = true;
        a.job.transition(JobStatus::pending);
        if (metrics) metrics->on_repair();
        enqueue(std::move(a), now);
      } else if (stopping()) {
        a.job.transition(JobStatus::pending);
        if (metrics) metrics->on_abandoned();
        set_aside(a.job, a.last_error, a.job.attempt());
      } else {
        exhaust(a, true);
      }
      return;
    }

    const auto& error = std::get<ProviderError>(d.outcome);
    const Classification c = classify_error(error);
    a.last_error = std::string(to_string(error.kind)) + ": " + error.detail;

    if (c.error_class == ErrorClass::fatal) {
      exhaust(a, true);
      if (!aborted) {
        aborted = true;
        abort_reason = a.last_error;
      }
      return;
    }
    if (stopping()) {
      a.job.transition(JobStatus::pending);
      if (metrics) metrics->on_abandoned();
      set_aside(a.job, a.last_error, a.job.attempt());
      return;
    }
    if (a.job.attempt() >= config.retry.max_retries + 1) {
      exhaust(a, true);
      return;
    }
    Rng rng(mix64(mix64(config.run_seed, hash_name(a.job.id().to_string())), static_cast<std::uint64_t>(a.job.attempt())));
    const Duration delay = retry_delay(c, a.job.attempt() - 1, config.retry, rng);
    a.job.transition(JobStatus::pending);
    a.next_is_repair = false;
    if (metrics) metrics->on_retry();
    enqueue(std::move(a), now + delay);
  };

  auto dispatch = [&](ActiveJob a, const RateLimiter::Grant& grant) {
    a.grant = grant.id;
    if (!a.next_is_repair) a.job.set_attempt(a.job.attempt() + 1);
    a.job.transition(JobStatus::in_flight);
    const std::uint64_t slot = next_slot++;
    const JobId id = a.job.id();
    PromptPayload payload = a.next_payload;
    in_flight.emplace(slot, std::move(a));

    if (ctx.hooks.on_dispatch) ctx.hooks.on_dispatch(grant.at, id, payload.estimated_tokens);
    if (metrics) metrics->on_dispatch();
    {
      std::lock_guard lock(stats_mutex);
      ++stats.dispatches;
      stats.peak_in_flight = std::max<std::int64_t>(stats.peak_in_flight, static_cast<std::int64_t>(in_flight.size()));
    }

    clock.hold();
    pool.submit([this, &mailbox, &clock, slot, payload = std::move(payload)] {
      ProviderOutcome outcome = ProviderError::transient("no outcome");
      try {
        outcome = ctx.provider->complete(payload, ctx.credentials);
      } catch (const std::exception& e) {
        outcome = ProviderError::transient(std::string("provider raised: ") + e.what());
      }
      mailbox.post({slot, std::move(outcome)});
      clock.notify();
      clock.release();
    });
    step(SchedulerStep::dispatched, id);
  };

  while (true) {
    for (auto& d : mailbox.take()) handle(std::move(d));

    if (!stopping()) {
      while (active_count() < capacity) {
        auto next = jobs.next();
        if (!next) break;
        ActiveJob a{std::move(*next), {}, {}, false, 0, {}, {}, 0};
        a.original = build_prompt(jobs.profile(a.job.agent_index()), jobs.question(a.job.question_index()), config);
        a.next_payload = a.original;
        if (a.original.estimated_tokens > config.tpm_limit) {
          a.last_error = "infeasible-request: needs " + std::to_string(a.original.estimated_tokens) +
                         " tokens, budget is " + std::to_string(config.tpm_limit);
          exhaust(a, false);
          continue;
        }
        enqueue(std::move(a), clock.now());
      }
    }
    {
      std::lock_guard lock(stats_mutex);
      stats.peak_materialized = std::max(stats.peak_materialized, jobs.buffered() + active_count());
    }

    TimePoint wake = kNever;
    if (!stopping()) {
      while (in_flight.size() < capacity && !waiting.empty()) {
        const TimePoint now = clock.now();
        auto head = waiting.begin();
        if (head->first.first > now) {
          wake = head->first.first;
          break;
        }
        auto r = limiter.try_acquire(now, head->second.next_payload.estimated_tokens);
        if (auto* at = std::get_if<TimePoint>(&r)) {
          wake = *at;
          break;
        }
        ActiveJob a = std::move(waiting.extract(head).mapped());
        dispatch(std::move(a), std::get<RateLimiter::Grant>(r));
      }
    }

    if (stopping()) {
      if (in_flight.empty()) break;
    } else if (jobs.exhausted() && active_count() == 0) {
      break;
    }

    if (!mailbox.empty()) continue;
    const bool cancel_seen = cancel_requested.load();
    clock.wait_until(wake, [&] { return !mailbox.empty() || cancel_requested.load() != cancel_seen; });
  }

  // Whatever never reached a terminal state is reported, not dropped.
  for (auto& [key, a] : waiting) {
    set_aside(a.job, a.job.attempt() == 0 ? "not-attempted" : a.last_error, a.job.attempt());
  }
  waiting.clear();
  while (auto rest = jobs.next()) set_aside(*rest, "not-attempted", 0);

  if (aborted) {
    manifest.status = RunStatus::aborted;
    manifest.failure = abort_reason;
  } else if (cancel_requested.load()) {
    manifest.status = RunStatus::cancelled;
  } else {
    manifest.status = unfinished.empty() ? RunStatus::completed : RunStatus::completed_with_failures;
  }
  RunManifest final_manifest = snapshot_manifest();
  ctx.checkpoints->write(final_manifest);
  step(SchedulerStep::checkpoint_written, JobId{});
  if (metrics) metrics->finish();
  return final_manifest;
}

}  // namespace surveysim

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#pragma once

#include <compare>
#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "surveysim/profile.hpp"
#include "surveysim/survey.hpp"

namespace surveysim {

struct JobId {
  std::string agent_id;
  std::string question_id;

  auto operator<=>(const JobId&) const = default;
  bool operator==(const JobId&) const = default;
  [[nodiscard]] std::string to_string() const { return agent_id + "/" + question_id; }
};

using JobIdSet = std::set<JobId>;

enum class JobStatus { pending, in_flight, completed, exhausted };

[[nodiscard]] std::string_view to_string(JobStatus status);

/// One (agent, question) unit of work. The prompt is built by the scheduler
/// at dispatch time, so a job in the stream is only a pair of indices.
class RequestJob {
 public:
  RequestJob(JobId id, std::size_t agent_index, std::size_t question_index)
      : id_(std::move(id)), agent_index_(agent_index), question_index_(question_index) {}

  [[nodiscard]] const JobId& id() const { return id_; }
  [[nodiscard]] std::size_t agent_index() const { return agent_index_; }
  [[nodiscard]] std::size_t question_index() const { return question_index_; }
  [[nodiscard]] JobStatus status() const { return status_; }

  /// Attempts charged against the retry budget so far.
  [[nodiscard]] std::int64_t attempt() const { return attempt_; }
  void set_attempt(std::int64_t attempt) { attempt_ = attempt; }

  /// pending -> in_flight -> {pending, completed, exhausted}. Also allows
  /// pending -> exhausted for requests rejected before dispatch. Throws
  /// std::logic_error on any other transition.
  void transition(JobStatus to);

 private:
  JobId id_;
  std::size_t agent_index_;
  std::size_t question_index_;
  std::int64_t attempt_ = 0;
  JobStatus status_ = JobStatus::pending;
};

/// Position in the agent-major cross product.
struct JobCursor {
  std::size_t agent_index = 0;
  std::size_t question_index = 0;

  auto operator<=>(const JobCursor&) const = default;
};

/// Lazily expands population x survey in agent-major order.
///
/// At most `buffer_size` jobs are materialized at a time. Jobs whose id is in
/// `skip` are never yielded, which is how a resumed run avoids completed work.
/// Single consumer.
class JobStream {
 public:
  JobStream(std::shared_ptr<const std::vector<AgentProfile>> population, std::shared_ptr<const SurveySpec> survey,
            std::size_t buffer_size = 256, JobCursor start = {}, std::shared_ptr<const JobIdSet> skip = nullptr);

  std::optional<RequestJob> next();

  /// Position of the next job not yet handed out.
  [[nodiscard]] JobCursor cursor() const;
  [[nodiscard]] std::size_t buffered() const { return buffer_.size(); }
  [[nodiscard]] std::size_t peak_buffered() const { return peak_buffered_; }
  [[nodiscard]] bool exhausted() const { return buffer_.empty() && fill_cursor_.agent_index >= population_->size(); }

  /// |population| x |survey|, ignoring skips and the start cursor.
  [[nodiscard]] std::size_t total() const { return population_->size() * survey_->size(); }

  [[nodiscard]] const AgentProfile& profile(std::size_t agent_index) const { return (*population_)[agent_index]; }
  [[nodiscard]] const SurveyQuestion& question(std::size_t question_index) const {
    return survey_->questions[question_index];
  }
  [[nodiscard]] const std::vector<AgentProfile>& population() const { return *population_; }
  [[nodiscard]] const SurveySpec& survey() const { return *survey_; }

 private:
  void refill();

  std::shared_ptr<const std::vector<AgentProfile>> population_;
  std::shared_ptr<const SurveySpec> survey_;
  std::size_t buffer_size_;
  std::shared_ptr<const JobIdSet> skip_;
  std::deque<RequestJob> buffer_;
  JobCursor fill_cursor_;
  std::size_t peak_buffered_ = 0;
};

/// Throws std::invalid_argument when either input is empty.
[[nodiscard]] JobStream expand_jobs(std::shared_ptr<const std::vector<AgentProfile>> population,
                                    std::shared_ptr<const SurveySpec> survey,
                                    std::size_t buffer_size = 256, JobCursor start = {});

}  // namespace surveysim

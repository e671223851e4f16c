// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#include "surveysim/jobs.hpp"

#include <algorithm>
#include <stdexcept>

namespace surveysim {

std::string_view to_string(JobStatus status) {
  switch (status) {
    case JobStatus::pending: return "pending";
    case JobStatus::in_flight: return "in-flight";
    case JobStatus::completed: return "completed";
    case JobStatus::exhausted: return "exhausted";
  }
  return "?";
}

void RequestJob::transition(JobStatus to) {
  const bool allowed = (status_ == JobStatus::pending && (to == JobStatus::in_flight || to == JobStatus::exhausted)) ||
                       (status_ == JobStatus::in_flight &&
                        (to == JobStatus::pending || to == JobStatus::completed || to == JobStatus::exhausted));
  if (!allowed) {
    throw std::logic_error("job " + id_.to_string() + ": illegal transition " + std::string(to_string(status_)) +
                           " -> " + std::string(to_string(to)));
  }
  status_ = to;
}

JobStream::JobStream(std::shared_ptr<const std::vector<AgentProfile>> population,
                     std::shared_ptr<const SurveySpec> survey, std::size_t buffer_size, JobCursor start,
                     std::shared_ptr<const JobIdSet> skip)
    : population_(std::move(population)),
      survey_(std::move(survey)),
      buffer_size_(std::max<std::size_t>(buffer_size, 1)),
      skip_(std::move(skip)),
      fill_cursor_(start) {
  if (survey_->size() == 0) fill_cursor_.agent_index = population_->size();
  if (fill_cursor_.question_index >= survey_->size()) {
    fill_cursor_.question_index = 0;
    ++fill_cursor_.agent_index;
  }
}

void JobStream::refill() {
  const auto& pop = *population_;
  const auto& questions = survey_->questions;
  while (buffer_.size() < buffer_size_ && fill_cursor_.agent_index < pop.size()) {
    const auto& agent = pop[fill_cursor_.agent_index];
    const auto& question = questions[fill_cursor_.question_index];
    JobId id{agent.agent_id, question.question_id};
    if (!skip_ || !skip_->contains(id)) {
      buffer_.emplace_back(std::move(id), fill_cursor_.agent_index, fill_cursor_.question_index);
    }
    if (++fill_cursor_.question_index == questions.size()) {
      fill_cursor_.question_index = 0;
      ++fill_cursor_.agent_index;
    }
  }
  peak_buffered_ = std::max(peak_buffered_, buffer_.size());
}

std::optional<RequestJob> JobStream::next() {
  if (buffer_.empty()) refill();
  if (buffer_.empty()) return std::nullopt;
  RequestJob job = std::move(buffer_.front());
  buffer_.pop_front();
  return job;
}

JobCursor JobStream::cursor() const {
  if (!buffer_.empty()) return {buffer_.front().agent_index(), buffer_.front().question_index()};
  return fill_cursor_;
}

JobStream expand_jobs(std::shared_ptr<const std::vector<AgentProfile>> population,
                      std::shared_ptr<const SurveySpec> survey, std::size_t buffer_size, JobCursor start) {
  if (!population || population->empty()) throw std::invalid_argument("expand_jobs: empty population");
  if (!survey || survey->size() == 0) throw std::invalid_argument("expand_jobs: empty survey");
  return JobStream(std::move(population), std::move(survey), buffer_size, start);
}

}  // namespace surveysim

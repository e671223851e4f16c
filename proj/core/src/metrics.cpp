// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#include "surveysim/metrics.hpp"

#include <algorithm>
#include <thread>

namespace surveysim {

namespace {
constexpr Duration kWindow = std::chrono::seconds(60);
}

void to_json(nlohmann::json& j, const MetricsSnapshot& s) {
  j = nlohmann::json{{"run_id", s.run_id},
                     {"total_jobs", s.total_jobs},
                     {"completed", s.completed},
                     {"failed_exhausted", s.failed_exhausted},
                     {"in_flight", s.in_flight},
                     {"pending", s.pending},
                     {"retries_total", s.retries_total},
                     {"format_repairs_total", s.format_repairs_total},
                     {"tokens_in", s.tokens_in},
                     {"tokens_out", s.tokens_out},
                     {"current_rpm", s.current_rpm},
                     {"estimated_cost", s.estimated_cost},
                     {"eta_seconds", s.eta_seconds ? nlohmann::json(*s.eta_seconds) : nlohmann::json(nullptr)},
                     {"final", s.final},
                     {"sequence", s.sequence}};
}

void from_json(const nlohmann::json& j, MetricsSnapshot& s) {
  s.run_id = j.at("run_id").get<std::string>();
  s.total_jobs = j.at("total_jobs").get<std::int64_t>();
  s.completed = j.at("completed").get<std::int64_t>();
  s.failed_exhausted = j.at("failed_exhausted").get<std::int64_t>();
  s.in_flight = j.at("in_flight").get<std::int64_t>();
  s.pending = j.at("pending").get<std::int64_t>();
  s.retries_total = j.at("retries_total").get<std::int64_t>();
  s.format_repairs_total = j.at("format_repairs_total").get<std::int64_t>();
  s.tokens_in = j.at("tokens_in").get<std::int64_t>();
  s.tokens_out = j.at("tokens_out").get<std::int64_t>();
  s.current_rpm = j.at("current_rpm").get<std::int64_t>();
  s.estimated_cost = j.at("estimated_cost").get<double>();
  const auto& eta = j.at("eta_seconds");
  s.eta_seconds = eta.is_null() ? std::nullopt : std::optional<double>(eta.get<double>());
  s.final = j.at("final").get<bool>();
  s.sequence = j.at("sequence").get<std::uint64_t>();
}

MetricsRecorder::MetricsRecorder(std::string run_id, std::int64_t total_jobs, Pricing pricing, const Clock& clock,
                                 std::int64_t already_completed)
    : run_id_(std::move(run_id)),
      total_(total_jobs),
      pricing_(pricing),
      clock_(clock),
      started_(clock.now()),
      completed_(already_completed) {}

void MetricsRecorder::changed_locked() {
  ++sequence_;
  cv_.notify_all();
}

void MetricsRecorder::on_dispatch() {
  std::lock_guard lock(mutex_);
  ++in_flight_;
  dispatches_.push_back(clock_.now());
  changed_locked();
}

void MetricsRecorder::on_completed() {
  std::lock_guard lock(mutex_);
  --in_flight_;
  ++completed_;
  completions_.push_back(clock_.now());
  changed_locked();
}

void MetricsRecorder::on_retry() {
  std::lock_guard lock(mutex_);
  --in_flight_;
  ++retries_;
  changed_locked();
}

void MetricsRecorder::on_repair() {
  std::lock_guard lock(mutex_);
  --in_flight_;
  ++repairs_;
  changed_locked();
}

void MetricsRecorder::on_exhausted(bool was_in_flight) {
  std::lock_guard lock(mutex_);
  if (was_in_flight) --in_flight_;
  ++failed_;
  changed_locked();
}

void MetricsRecorder::on_abandoned() {
  std::lock_guard lock(mutex_);
  --in_flight_;
  changed_locked();
}

void MetricsRecorder::on_usage(const TokenUsage& usage) {
  std::lock_guard lock(mutex_);
  tokens_in_ += usage.input_tokens;
  tokens_out_ += usage.output_tokens;
  changed_locked();
}

void MetricsRecorder::finish() {
  std::lock_guard lock(mutex_);
  finished_ = true;
  changed_locked();
}

bool MetricsRecorder::finished() const {
  std::lock_guard lock(mutex_);
  return finished_;
}

void MetricsRecorder::expire_locked(TimePoint now) const {
  while (!dispatches_.empty() && dispatches_.front() + kWindow <= now) dispatches_.pop_front();
  while (!completions_.empty() && completions_.front() + kWindow <= now) completions_.pop_front();
}

MetricsSnapshot MetricsRecorder::snapshot_locked() const {
  const TimePoint now = clock_.now();
  expire_locked(now);
  MetricsSnapshot s;
  s.run_id = run_id_;
  s.total_jobs = total_;
  s.completed = completed_;
  s.failed_exhausted = failed_;
  s.in_flight = in_flight_;
  s.pending = total_ - completed_ - failed_ - in_flight_;
  s.retries_total = retries_;
  s.format_repairs_total = repairs_;
  s.tokens_in = tokens_in_;
  s.tokens_out = tokens_out_;
  s.current_rpm = static_cast<std::int64_t>(dispatches_.size());
  s.estimated_cost = static_cast<double>(tokens_in_) * pricing_.input_per_token +
                     static_cast<double>(tokens_out_) * pricing_.output_per_token;
  // A run younger than the window is measured over its actual age.
  const double span = std::chrono::duration<double>(std::min(kWindow, now - started_)).count();
  if (!completions_.empty() && span > 0) {
    const double rate = static_cast<double>(completions_.size()) / span;
    s.eta_seconds = static_cast<double>(s.pending) / rate;
  }
  s.final = finished_;
  s.sequence = sequence_;
  return s;
}

MetricsSnapshot MetricsRecorder::snapshot() const {
  std::lock_guard lock(mutex_);
  return snapshot_locked();
}

std::unique_ptr<MetricsSubscription> MetricsRecorder::subscribe(std::chrono::milliseconds min_interval) {
  return std::make_unique<MetricsSubscription>(shared_from_this(), min_interval);
}

MetricsSubscription::MetricsSubscription(std::shared_ptr<MetricsRecorder> recorder,
                                         std::chrono::milliseconds min_interval)
    : recorder_(std::move(recorder)), min_interval_(min_interval) {}

std::optional<MetricsSnapshot> MetricsSubscription::next(std::chrono::milliseconds heartbeat) {
  if (closed_) return std::nullopt;
  auto& r = *recorder_;

  if (last_emit_) {
    const auto earliest = *last_emit_ + min_interval_;
    if (std::chrono::steady_clock::now() < earliest) std::this_thread::sleep_until(earliest);
  }

  std::unique_lock lock(r.mutex_);
  if (emitted_any_) {
    r.cv_.wait_for(lock, heartbeat, [&] { return r.sequence_ != last_sequence_ || r.finished_; });
  }
  MetricsSnapshot s = r.snapshot_locked();
  lock.unlock();

  last_sequence_ = s.sequence;
  last_emit_ = std::chrono::steady_clock::now();
  emitted_any_ = true;
  if (s.final) closed_ = true;
  return s;
}

void MetricsRegistry::put(const std::string& run_id, std::shared_ptr<MetricsRecorder> recorder) {
  std::lock_guard lock(mutex_);
  recorders_[run_id] = std::move(recorder);
}

std::shared_ptr<MetricsRecorder> MetricsRegistry::find(const std::string& run_id) const {
  std::lock_guard lock(mutex_);
  auto it = recorders_.find(run_id);
  return it == recorders_.end() ? nullptr : it->second;
}

void MetricsRegistry::erase(const std::string& run_id) {
  std::lock_guard lock(mutex_);
  recorders_.erase(run_id);
}

}  // namespace surveysim

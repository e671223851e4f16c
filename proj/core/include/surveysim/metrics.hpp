// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "surveysim/clock.hpp"
#include "surveysim/config.hpp"
#include "surveysim/provider.hpp"

namespace surveysim {

struct MetricsSnapshot {
  std::string run_id;
  std::int64_t total_jobs = 0;
  std::int64_t completed = 0;
  std::int64_t failed_exhausted = 0;
  std::int64_t in_flight = 0;
  std::int64_t pending = 0;
  std::int64_t retries_total = 0;
  std::int64_t format_repairs_total = 0;
  std::int64_t tokens_in = 0;
  std::int64_t tokens_out = 0;
  std::int64_t current_rpm = 0;
  double estimated_cost = 0.0;
  std::optional<double> eta_seconds;
  bool final = false;
  std::uint64_t sequence = 0;

  bool operator==(const MetricsSnapshot&) const = default;
};

void to_json(nlohmann::json& j, const MetricsSnapshot& s);
void from_json(const nlohmann::json& j, MetricsSnapshot& s);

class MetricsRecorder;

/// Pull-based view of a recorder's snapshots. Consecutive snapshots are at
/// least `min_interval` apart in real time; intermediate changes are
/// coalesced. The final snapshot is always delivered, after which next()
/// returns nothing.
class MetricsSubscription {
 public:
  MetricsSubscription(std::shared_ptr<MetricsRecorder> recorder, std::chrono::milliseconds min_interval);

  /// Blocks until the counters change, the run finishes, or `heartbeat`
  /// elapses (returning the unchanged snapshot).
  std::optional<MetricsSnapshot> next(std::chrono::milliseconds heartbeat = std::chrono::seconds(15));

 private:
  std::shared_ptr<MetricsRecorder> recorder_;
  std::chrono::milliseconds min_interval_;
  std::optional<std::chrono::steady_clock::time_point> last_emit_;
  std::uint64_t last_sequence_ = 0;
  bool emitted_any_ = false;
  bool closed_ = false;
};

/// Counters for one run. Events come from the run's coordinator; snapshot()
/// may be called from any thread.
class MetricsRecorder : public std::enable_shared_from_this<MetricsRecorder> {
 public:
  MetricsRecorder(std::string run_id, std::int64_t total_jobs, Pricing pricing, const Clock& clock,
                  std::int64_t already_completed = 0);

  void on_dispatch();
  void on_completed();
  /// An in-flight job returned to the queue to be retried.
  void on_retry();
  /// An in-flight job returned to the queue for a format repair.
  void on_repair();
  void on_exhausted(bool was_in_flight);
  /// An in-flight job set aside unfinished because the run is stopping.
  void on_abandoned();
  void on_usage(const TokenUsage& usage);
  void finish();

  [[nodiscard]] MetricsSnapshot snapshot() const;
  [[nodiscard]] bool finished() const;

  [[nodiscard]] std::unique_ptr<MetricsSubscription> subscribe(
      std::chrono::milliseconds min_interval = std::chrono::milliseconds(250));

 private:
  friend class MetricsSubscription;

  void changed_locked();
  void expire_locked(TimePoint now) const;
  MetricsSnapshot snapshot_locked() const;

  const std::string run_id_;
  const std::int64_t total_;
  const Pricing pricing_;
  const Clock& clock_;
  const TimePoint started_;

  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::int64_t completed_ = 0;
  std::int64_t failed_ = 0;
  std::int64_t in_flight_ = 0;
  std::int64_t retries_ = 0;
  std::int64_t repairs_ = 0;
  std::int64_t tokens_in_ = 0;
  std::int64_t tokens_out_ = 0;
  mutable std::deque<TimePoint> dispatches_;
  mutable std::deque<TimePoint> completions_;
  std::uint64_t sequence_ = 0;
  bool finished_ = false;
};

class MetricsRegistry {
 public:
  void put(const std::string& run_id, std::shared_ptr<MetricsRecorder> recorder);
  [[nodiscard]] std::shared_ptr<MetricsRecorder> find(const std::string& run_id) const;
  void erase(const std::string& run_id);

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<MetricsRecorder>, std::less<>> recorders_;
};

}  // namespace surveysim

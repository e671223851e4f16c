// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <list>
#include <mutex>
#include <utility>

namespace surveysim {

using Duration = std::chrono::nanoseconds;
using TimePoint = std::chrono::time_point<std::chrono::steady_clock, Duration>;

inline constexpr TimePoint kNever = TimePoint::max();

[[nodiscard]] inline std::int64_t to_millis(Duration d) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(d).count();
}
[[nodiscard]] inline std::int64_t to_millis(TimePoint t) { return to_millis(t.time_since_epoch()); }

/// Time source injected into every component that waits or timestamps.
///
/// Waiting goes through `wait_until` so that a simulated implementation can
/// tell when every participant is blocked and jump time forward. Any state a
/// wait predicate reads must be published with `notify()` after it changes.
class Clock {
 public:
  virtual ~Clock() = default;

  [[nodiscard]] virtual TimePoint now() const = 0;

  /// Blocks until `ready()` holds or `deadline` is reached. Returns the final
  /// value of `ready()`. `ready` runs under the clock's internal lock.
  virtual bool wait_until(TimePoint deadline, const std::function<bool()>& ready) = 0;

  virtual void notify() = 0;

  /// Registers one unit of outstanding work that may advance without waiting
  /// on the clock (a running coordinator, a dispatched request). Simulated
  /// time never moves while any hold is outstanding and not itself waiting.
  virtual void hold() {}
  virtual void release() {}

  void sleep_until(TimePoint deadline) {
    wait_until(deadline, [] { return false; });
  }
  void sleep_for(Duration d) { sleep_until(now() + d); }
};

/// RAII hold on a clock.
class ClockHold {
 public:
  explicit ClockHold(Clock& clock) : clock_(&clock) { clock_->hold(); }
  ClockHold(ClockHold&& other) noexcept : clock_(std::exchange(other.clock_, nullptr)) {}
  ClockHold& operator=(ClockHold&&) = delete;
  ClockHold(const ClockHold&) = delete;
  ClockHold& operator=(const ClockHold&) = delete;
  ~ClockHold() {
    if (clock_ != nullptr) clock_->release();
  }

 private:
  Clock* clock_;
};

class SystemClock final : public Clock {
 public:
  [[nodiscard]] TimePoint now() const override;
  bool wait_until(TimePoint deadline, const std::function<bool()>& ready) override;
  void notify() override;

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
};

/// Discrete-event clock for deterministic tests.
///
/// Time starts at the epoch and only advances when every hold is either
/// released or parked inside `wait_until`, and no parked waiter's predicate
/// is satisfied. It then jumps to the earliest parked deadline.
class SimulatedClock final : public Clock {
 public:
  SimulatedClock() = default;
  explicit SimulatedClock(TimePoint start) : now_(start) {}

  [[nodiscard]] TimePoint now() const override;
  bool wait_until(TimePoint deadline, const std::function<bool()>& ready) override;
  void notify() override;
  void hold() override;
  void release() override;

  /// Moves time forward manually; only for single-threaded tests.
  void advance(Duration d);

 private:
  struct Waiter {
    TimePoint deadline;
    const std::function<bool()>* ready;
    bool released = false;
  };

  void release_ready_locked();
  void maybe_advance_locked();

  mutable std::mutex mutex_;
  std::condition_variable cv_;
  TimePoint now_{};
  // Holds that are currently able to make progress without time moving.
  std::int64_t running_ = 0;
  std::list<Waiter*> waiters_;
};

}  // namespace surveysim

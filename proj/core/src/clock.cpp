// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#include "surveysim/clock.hpp"

#include <algorithm>

namespace surveysim {

TimePoint SystemClock::now() const {
  return std::chrono::time_point_cast<Duration>(std::chrono::steady_clock::now());
}

bool SystemClock::wait_until(TimePoint deadline, const std::function<bool()>& ready) {
  std::unique_lock lock(mutex_);
  if (deadline == kNever) {
    cv_.wait(lock, ready);
    return true;
  }
  return cv_.wait_until(lock, deadline, ready);
}

void SystemClock::notify() {
  // Taking the lock orders the notification after any in-progress predicate
  // evaluation, so a waiter cannot miss it.
  { std::lock_guard lock(mutex_); }
  cv_.notify_all();
}

TimePoint SimulatedClock::now() const {
  std::lock_guard lock(mutex_);
  return now_;
}

bool SimulatedClock::wait_until(TimePoint deadline, const std::function<bool()>& ready) {
  std::unique_lock lock(mutex_);
  if (ready()) return true;
  if (now_ >= deadline) return false;

  Waiter self{deadline, &ready};
  waiters_.push_back(&self);
  --running_;
  maybe_advance_locked();
  cv_.wait(lock, [&] { return self.released; });
  waiters_.remove(&self);
  return ready();
}

void SimulatedClock::notify() {
  std::lock_guard lock(mutex_);
  release_ready_locked();
  maybe_advance_locked();
  cv_.notify_all();
}

void SimulatedClock::hold() {
  std::lock_guard lock(mutex_);
  ++running_;
}

void SimulatedClock::release() {
  std::lock_guard lock(mutex_);
  --running_;
  maybe_advance_locked();
}

void SimulatedClock::advance(Duration d) {
  std::lock_guard lock(mutex_);
  now_ += d;
  for (Waiter* w : waiters_) {
    if (!w->released && w->deadline <= now_) {
      w->released = true;
      ++running_;
    }
  }
  release_ready_locked();
  cv_.notify_all();
}

void SimulatedClock::release_ready_locked() {
  for (Waiter* w : waiters_) {
    if (!w->released && (*w->ready)()) {
      w->released = true;
      ++running_;
    }
  }
}

void SimulatedClock::maybe_advance_locked() {
  while (running_ <= 0) {
    TimePoint next = kNever;
    bool any_parked = false;
    for (Waiter* w : waiters_) {
      if (w->released) continue;
      any_parked = true;
      next = std::min(next, w->deadline);
    }
    // Nothing parked, or everyone waits forever: nothing to advance to.
    if (!any_parked || next == kNever) return;
    now_ = std::max(now_, next);
    for (Waiter* w : waiters_) {
      if (!w->released && w->deadline <= now_) {
        w->released = true;
        ++running_;
      }
    }
    cv_.notify_all();
  }
}

}  // namespace surveysim

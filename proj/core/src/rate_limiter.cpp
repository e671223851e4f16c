// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#include "surveysim/rate_limiter.hpp"

#include <algorithm>
#include <string>

#include "surveysim/errors.hpp"

namespace surveysim {

RateLimiter::RateLimiter(RateBudget budget, Duration window) : budget_(budget), window_(window) {}

void RateLimiter::expire_locked(TimePoint now) {
  while (!entries_.empty() && entries_.front().at + window_ <= now) {
    tokens_ -= entries_.front().charged;
    entries_.pop_front();
  }
}

std::variant<RateLimiter::Grant, TimePoint> RateLimiter::try_acquire(TimePoint now, std::int64_t tokens) {
  if (tokens > budget_.tpm_limit) {
    throw InfeasibleRequest("request needs " + std::to_string(tokens) + " tokens but the budget is " +
                            std::to_string(budget_.tpm_limit) + " per window");
  }
  tokens = std::max<std::int64_t>(tokens, 0);
  std::lock_guard lock(mutex_);
  expire_locked(now);

  const auto count = static_cast<std::int64_t>(entries_.size());
  if (count + 1 <= budget_.rpm_limit && tokens_ + tokens <= budget_.tpm_limit) {
    // Grants are issued in nondecreasing time order.
    const TimePoint at = entries_.empty() ? now : std::max(now, entries_.back().at);
    entries_.push_back({next_id_, at, tokens, tokens});
    tokens_ += tokens;
    return Grant{next_id_++, at};
  }

  TimePoint ready = now;
  if (count + 1 > budget_.rpm_limit) {
    // The oldest (count + 1 - rpm) grants have to leave the window.
    const auto& e = entries_[static_cast<std::size_t>(count - budget_.rpm_limit)];
    ready = std::max(ready, e.at + window_);
  }
  if (tokens_ + tokens > budget_.tpm_limit) {
    std::int64_t remaining = tokens_;
    for (const auto& e : entries_) {
      remaining -= e.charged;
      if (remaining + tokens <= budget_.tpm_limit) {
        ready = std::max(ready, e.at + window_);
        break;
      }
    }
  }
  return ready;
}

RateLimiter::Grant RateLimiter::acquire(Clock& clock, std::int64_t tokens) {
  while (true) {
    auto r = try_acquire(clock.now(), tokens);
    if (auto* g = std::get_if<Grant>(&r)) return *g;
    clock.sleep_until(std::get<TimePoint>(r));
  }
}

void RateLimiter::reconcile(std::uint64_t grant_id, std::int64_t actual_tokens) {
  std::lock_guard lock(mutex_);
  // Ids are handed out in increasing order, so the window is sorted by id.
  auto it = std::lower_bound(entries_.begin(), entries_.end(), grant_id,
                             [](const Entry& e, std::uint64_t id) { return e.id < id; });
  if (it == entries_.end() || it->id != grant_id) return;
  const std::int64_t charge = std::max(it->estimate, actual_tokens);
  tokens_ += charge - it->charged;
  it->charged = charge;
}

std::int64_t RateLimiter::requests_in_window(TimePoint now) {
  std::lock_guard lock(mutex_);
  expire_locked(now);
  return static_cast<std::int64_t>(entries_.size());
}

std::int64_t RateLimiter::tokens_in_window(TimePoint now) {
  std::lock_guard lock(mutex_);
  expire_locked(now);
  return tokens_;
}

}  // namespace surveysim

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#pragma once

#include <cstdint>
#include <deque>
#include <mutex>
#include <variant>

#include "surveysim/clock.hpp"

namespace surveysim {

struct RateBudget {
  std::int64_t rpm_limit = 60;
  std::int64_t tpm_limit = 90000;
};

/// Two sliding-window budgets, requests and tokens, over a trailing window
/// (60 s by default). A grant at time t counts against every window
/// (s - window, s] containing t. Both budgets must admit a request before it
/// is granted.
class RateLimiter {
 public:
  struct Grant {
    std::uint64_t id = 0;
    TimePoint at{};
  };

  explicit RateLimiter(RateBudget budget, Duration window = std::chrono::seconds(60));

  /// Grants now, or returns the earliest time the same request could be
  /// granted if nothing else is granted before then. Throws
  /// InfeasibleRequest when `tokens` exceeds the token budget itself.
  std::variant<Grant, TimePoint> try_acquire(TimePoint now, std::int64_t tokens);

  /// Blocking form of try_acquire.
  Grant acquire(Clock& clock, std::int64_t tokens);

  /// Replaces a grant's estimate with the provider-reported usage. The charge
  /// never drops below the estimate, so windows of granted estimates stay
  /// within budget.
  void reconcile(std::uint64_t grant_id, std::int64_t actual_tokens);

  [[nodiscard]] std::int64_t requests_in_window(TimePoint now);
  [[nodiscard]] std::int64_t tokens_in_window(TimePoint now);
  [[nodiscard]] const RateBudget& budget() const { return budget_; }

 private:
  struct Entry {
    std::uint64_t id;
    TimePoint at;
    std::int64_t estimate;
    std::int64_t charged;
  };

  void expire_locked(TimePoint now);

  RateBudget budget_;
  Duration window_;
  std::mutex mutex_;
  std::deque<Entry> entries_;
  std::int64_t tokens_ = 0;
  std::uint64_t next_id_ = 1;
};

}  // namespace surveysim

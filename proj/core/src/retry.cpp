// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#include "surveysim/retry.hpp"

#include <algorithm>
#include <cmath>

namespace surveysim {

Classification classify_error(const ProviderError& error) {
  switch (error.kind) {
    case ProviderErrorKind::rate_limit:
      return {ErrorClass::retryable_rate_limit, error.retry_after};
    case ProviderErrorKind::transient:
      return {ErrorClass::retryable_transient, std::nullopt};
    case ProviderErrorKind::fatal:
      return {ErrorClass::fatal, std::nullopt};
  }
  return {ErrorClass::fatal, std::nullopt};
}

Classification classify_error(const FormatError&) { return {ErrorClass::format, std::nullopt}; }

Duration compute_backoff(std::int64_t attempt, const RetryPolicy& policy, Rng& rng) {
  using Seconds = std::chrono::duration<double>;
  const double base = Seconds(policy.base_delay).count();
  const double cap = Seconds(policy.max_delay).count();
  // 2^attempt overflows a double's useful range long before 1024; the cap
  // has taken over by then anyway.
  const double exp = std::ldexp(1.0, static_cast<int>(std::clamp<std::int64_t>(attempt, 0, 1000)));
  double delay = std::min(cap, base * exp);
  if (policy.jitter_fraction > 0) delay *= 1.0 + rng.uniform_real(0.0, policy.jitter_fraction);
  return std::chrono::duration_cast<Duration>(Seconds(delay));
}

Duration retry_delay(const Classification& c, std::int64_t attempt, const RetryPolicy& policy, Rng& rng) {
  Duration d = compute_backoff(attempt, policy, rng);
  if (c.retry_after) d = std::max(d, *c.retry_after);
  return d;
}

std::string_view to_string(ErrorClass c) {
  switch (c) {
    case ErrorClass::retryable_rate_limit: return "retryable-rate-limit";
    case ErrorClass::retryable_transient: return "retryable-transient";
    case ErrorClass::fatal: return "fatal";
    case ErrorClass::format: return "format";
  }
  return "?";
}

}  // namespace surveysim

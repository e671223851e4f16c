// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#pragma once

#include <cstdint>
#include <optional>

#include "surveysim/config.hpp"
#include "surveysim/prompt.hpp"
#include "surveysim/provider.hpp"
#include "surveysim/rng.hpp"

namespace surveysim {

enum class ErrorClass { retryable_rate_limit, retryable_transient, fatal, format };

struct Classification {
  ErrorClass error_class = ErrorClass::retryable_transient;
  std::optional<Duration> retry_after;

  [[nodiscard]] bool retryable() const {
    return error_class == ErrorClass::retryable_rate_limit || error_class == ErrorClass::retryable_transient;
  }
};

[[nodiscard]] Classification classify_error(const ProviderError& error);
[[nodiscard]] Classification classify_error(const FormatError& error);

/// min(max_delay, base_delay * 2^attempt) * (1 + u), u ~ U[0, jitter_fraction].
[[nodiscard]] Duration compute_backoff(std::int64_t attempt, const RetryPolicy& policy, Rng& rng);

/// Delay before retrying after a retryable error: the backoff, but never
/// less than a provider-supplied retry-after.
[[nodiscard]] Duration retry_delay(const Classification& c, std::int64_t attempt, const RetryPolicy& policy, Rng& rng);

[[nodiscard]] std::string_view to_string(ErrorClass c);

}  // namespace surveysim

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "surveysim/clock.hpp"
#include "surveysim/prompt.hpp"

namespace surveysim {

struct TokenUsage {
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;

  bool operator==(const TokenUsage&) const = default;
  [[nodiscard]] std::int64_t total() const { return input_tokens + output_tokens; }
};

struct ProviderResult {
  std::string text;
  TokenUsage usage;
  Duration latency{};
};

enum class ProviderErrorKind { rate_limit, transient, fatal };

struct ProviderError {
  ProviderErrorKind kind = ProviderErrorKind::transient;
  /// Only meaningful for rate_limit.
  std::optional<Duration> retry_after;
  std::string detail;

  static ProviderError rate_limit(std::optional<Duration> retry_after, std::string detail = "rate limited") {
    return {ProviderErrorKind::rate_limit, retry_after, std::move(detail)};
  }
  static ProviderError transient(std::string detail) { return {ProviderErrorKind::transient, std::nullopt, std::move(detail)}; }
  static ProviderError fatal(std::string detail) { return {ProviderErrorKind::fatal, std::nullopt, std::move(detail)}; }
};

using ProviderOutcome = std::variant<ProviderResult, ProviderError>;

struct Credentials {
  std::string api_key;
};

/// A single-call chat-completion service: system and user text in, text out.
/// Implementations must tolerate concurrent `complete` calls.
class Provider {
 public:
  virtual ~Provider() = default;
  [[nodiscard]] virtual std::string_view id() const = 0;
  virtual ProviderOutcome complete(const PromptPayload& payload, const Credentials& credentials) = 0;
};

struct ProviderInfo {
  std::string id;
  double min_temperature = 0.0;
  double max_temperature = 2.0;
  std::string description;
};

[[nodiscard]] const std::vector<ProviderInfo>& provider_registry();
[[nodiscard]] const ProviderInfo* find_provider(std::string_view id);

[[nodiscard]] std::string_view to_string(ProviderErrorKind kind);

}  // namespace surveysim

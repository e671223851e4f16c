// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "surveysim/config.hpp"
#include "surveysim/provider.hpp"

namespace surveysim {

/// Maps one HTTP exchange of the chat-completions protocol to an outcome.
/// Total over every status code: 2xx with a readable body is a result, 429
/// is a rate limit (fatal when the body reports exhausted quota), 408, 409,
/// 425, 5xx and 1xx are transient, and any other status is fatal.
[[nodiscard]] ProviderOutcome classify_http_response(int status, std::optional<std::string_view> retry_after,
                                                     std::string_view body);

/// JSON request body for a payload.
[[nodiscard]] std::string chat_request_body(const PromptPayload& payload);

/// Adapter for OpenAI-compatible `/v1/chat/completions` endpoints.
class ChatCompletionsProvider final : public Provider {
 public:
  /// `api_base` is scheme://host[:port], e.g. https://api.openai.com.
  explicit ChatCompletionsProvider(std::string api_base, Duration timeout = std::chrono::seconds(120));

  [[nodiscard]] std::string_view id() const override { return "openai"; }
  ProviderOutcome complete(const PromptPayload& payload, const Credentials& credentials) override;

 private:
  std::string api_base_;
  Duration timeout_;
};

/// Reads the API key from the environment variable named in the config.
/// Returns empty credentials when it is unset.
[[nodiscard]] Credentials credentials_from_env(const ProviderOptions& options);

/// Real provider for `config.provider_id`. Throws Error for "mock", which
/// needs a script; see make_mock.
[[nodiscard]] std::unique_ptr<Provider> make_provider(const SimulationConfig& config);

}  // namespace surveysim

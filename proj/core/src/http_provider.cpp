// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#include "surveysim/http_provider.hpp"

#include <httplib.h>

#include <charconv>
#include <cstdlib>

#include <nlohmann/json.hpp>

namespace surveysim {

namespace {

std::optional<Duration> parse_retry_after(std::optional<std::string_view> header) {
  if (!header || header->empty()) return std::nullopt;
  double seconds = 0;
  auto [ptr, ec] = std::from_chars(header->data(), header->data() + header->size(), seconds);
  // HTTP-date values are not interpreted; the backoff policy covers them.
  if (ec != std::errc{} || ptr != header->data() + header->size() || seconds < 0) return std::nullopt;
  return std::chrono::duration_cast<Duration>(std::chrono::duration<double>(seconds));
}

std::string error_code(std::string_view body) {
  auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("error") || !j["error"].is_object()) return {};
  const auto& e = j["error"];
  if (e.contains("code") && e["code"].is_string()) return e["code"].get<std::string>();
  if (e.contains("type") && e["type"].is_string()) return e["type"].get<std::string>();
  return {};
}

std::string snippet(std::string_view body) {
  constexpr std::size_t kMax = 200;
  return std::string(body.substr(0, kMax));
}

}  // namespace

ProviderOutcome classify_http_response(int status, std::optional<std::string_view> retry_after,
                                       std::string_view body) {
  const std::string prefix = "HTTP " + std::to_string(status);
  if (status >= 200 && status < 300) {
    auto j = nlohmann::json::parse(body, nullptr, false);
    try {
      if (j.is_discarded()) throw std::runtime_error("not JSON");
      ProviderResult result;
      result.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
      if (j.contains("usage") && j["usage"].is_object()) {
        result.usage.input_tokens = j["usage"].value("prompt_tokens", std::int64_t{0});
        result.usage.output_tokens = j["usage"].value("completion_tokens", std::int64_t{0});
      }
      return result;
    } catch (const std::exception&) {
      return ProviderError::transient(prefix + ": unreadable completion body: " + snippet(body));
    }
  }
  if (status == 429) {
    const std::string code = error_code(body);
    if (code == "insufficient_quota") return ProviderError::fatal(prefix + ": quota exhausted");
    return ProviderError::rate_limit(parse_retry_after(retry_after), prefix + ": rate limited");
  }
  if ((status >= 100 && status < 200) || status == 408 || status == 409 || status == 425 ||
      (status >= 500 && status < 600)) {
    return ProviderError::transient(prefix + ": " + snippet(body));
  }
  // 3xx (misconfigured endpoint), auth failures, malformed requests and any
  // unrecognised status would fail the same way on every retry.
  return ProviderError::fatal(prefix + ": " + snippet(body));
}

std::string chat_request_body(const PromptPayload& payload) {
  nlohmann::json body{
      {"model", payload.model_params.model_name},
      {"messages",
       nlohmann::json::array({{{"role", "system"}, {"content", payload.system_text}},
                              {{"role", "user"}, {"content", payload.user_text}}})},
      {"temperature", payload.model_params.temperature},
      {"top_p", payload.model_params.top_p},
      {"max_tokens", payload.model_params.max_output_tokens},
  };
  return body.dump();
}

ChatCompletionsProvider::ChatCompletionsProvider(std::string api_base, Duration timeout)
    : api_base_(std::move(api_base)), timeout_(timeout) {}

ProviderOutcome ChatCompletionsProvider::complete(const PromptPayload& payload, const Credentials& credentials) {
  if (credentials.api_key.empty()) return ProviderError::fatal("missing API credentials");

  const auto started = std::chrono::steady_clock::now();
  httplib::Client client(api_base_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
  client.set_connection_timeout(secs);
  client.set_read_timeout(secs);
  client.set_write_timeout(secs);
  client.set_bearer_token_auth(credentials.api_key);

  auto res = client.Post("/v1/chat/completions", chat_request_body(payload), "application/json");
  if (!res) {
    const auto err = res.error();
    if (err == httplib::Error::SSLServerVerification) {
      return ProviderError::fatal("TLS verification failed for " + api_base_);
    }
    return ProviderError::transient("transport error: " + httplib::to_string(err));
  }
  std::optional<std::string_view> retry_after;
  std::string header;
  if (res->has_header("Retry-After")) {
    header = res->get_header_value("Retry-After");
    retry_after = header;
  }
  auto outcome = classify_http_response(res->status, retry_after, res->body);
  if (auto* result = std::get_if<ProviderResult>(&outcome)) {
    result->latency = std::chrono::duration_cast<Duration>(std::chrono::steady_clock::now() - started);
  }
  return outcome;
}

Credentials credentials_from_env(const ProviderOptions& options) {
  const char* value = std::getenv(options.api_key_env.c_str());
  return Credentials{value != nullptr ? std::string(value) : std::string()};
}

std::unique_ptr<Provider> make_provider(const SimulationConfig& config) {
  if (config.provider_id == "openai") return std::make_unique<ChatCompletionsProvider>(config.provider.api_base);
  throw Error("provider \"" + config.provider_id + "\" cannot be constructed from the config alone");
}

}  // namespace surveysim

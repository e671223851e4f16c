// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "surveysim/provider.hpp"
#include "surveysim/rng.hpp"

namespace surveysim {

/// A scripted success text or a scripted error.
using MockOutcome = std::variant<std::string, ProviderError>;

/// Behaviour of the mock provider.
///
/// Calls for a job listed in `responses` replay its outcome sequence; once
/// the sequence runs out its last entry repeats. All other calls draw from a
/// seeded stream keyed by job and per-job call number: a transient error with
/// probability `failure_rate`, otherwise a malformed reply with probability
/// `malformed_rate`, otherwise a schema-valid answer.
struct MockScript {
  std::map<JobId, std::vector<MockOutcome>> responses;
  double failure_rate = 0.0;
  double malformed_rate = 0.0;
  Duration latency_min{};
  Duration latency_max{};

  [[nodiscard]] ValidationReport validate() const;
};

/// One entry of the mock's call log.
struct MockCall {
  JobId job;
  std::int64_t call_index = 0;
  std::string outcome;  // "ok", "malformed", or the error kind

  bool operator==(const MockCall&) const = default;
};

class MockProvider final : public Provider {
 public:
  /// `clock` is used to model latency and may be null when latency is zero.
  MockProvider(MockScript script, std::uint64_t seed, Clock* clock);

  [[nodiscard]] std::string_view id() const override { return "mock"; }
  ProviderOutcome complete(const PromptPayload& payload, const Credentials& credentials) override;

  /// Calls so far, sorted by (job, call index) so that transcripts compare
  /// equal regardless of thread interleaving.
  [[nodiscard]] std::vector<MockCall> transcript() const;
  [[nodiscard]] std::int64_t call_count() const;

 private:
  MockScript script_;
  std::uint64_t seed_;
  Clock* clock_;
  mutable std::mutex mutex_;
  std::map<JobId, std::int64_t> calls_;
  std::vector<MockCall> log_;
};

/// Throws ValidationError when the script is invalid.
[[nodiscard]] std::unique_ptr<MockProvider> make_mock(MockScript script, std::uint64_t seed, Clock* clock = nullptr);

/// A reply in the directive's format with a uniformly drawn valid value.
[[nodiscard]] std::string synthesize_answer(const AnswerSchema& schema, Rng& rng);

/// Structured-text form, e.g.
/// {"failure_rate": 0.1, "responses": {"a3/q1": [{"error": "fatal"}]}}.
[[nodiscard]] MockScript parse_mock_script(std::string_view text);
void from_json(const nlohmann::json& j, MockScript& script);

}  // namespace surveysim

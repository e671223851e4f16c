// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "surveysim/clock.hpp"
#include "surveysim/errors.hpp"
#include "surveysim/profile.hpp"

namespace surveysim {

struct RetryPolicy {
  std::int64_t max_retries = 3;
  Duration base_delay = std::chrono::seconds(1);
  Duration max_delay = std::chrono::seconds(60);
  double jitter_fraction = 0.1;

  bool operator==(const RetryPolicy&) const = default;
};

/// Per-token prices used for cost estimates in metrics.
struct Pricing {
  double input_per_token = 0.0;
  double output_per_token = 0.0;

  bool operator==(const Pricing&) const = default;
};

/// Settings only the HTTP adapter reads. The key itself is never stored; only
/// the name of the environment variable holding it.
struct ProviderOptions {
  std::string api_base = "https://api.openai.com";
  std::string api_key_env = "OPENAI_API_KEY";

  bool operator==(const ProviderOptions&) const = default;
};

inline constexpr std::int64_t kDefaultBufferSize = 256;

struct SimulationConfig {
  std::uint64_t run_seed = 0;
  std::int64_t population_size = 1;
  ProfileSchema profile_schema;
  std::string provider_id = "mock";
  std::string model_name = "mock-model";
  double temperature = 1.0;
  double top_p = 1.0;
  std::int64_t max_output_tokens = 256;
  std::int64_t max_concurrency = 4;
  std::int64_t rpm_limit = 60;
  std::int64_t tpm_limit = 90000;
  RetryPolicy retry;
  std::int64_t format_repair_attempts = 2;

  std::int64_t buffer_size = kDefaultBufferSize;
  /// Empty means the schema's default template.
  std::string profile_template;
  Pricing pricing;
  ProviderOptions provider;

  bool operator==(const SimulationConfig&) const = default;
};

[[nodiscard]] ValidationReport validate_config(const SimulationConfig& config);

/// SHA-256 over the canonical structured-text form.
[[nodiscard]] std::string config_hash(const SimulationConfig& config);

/// Parses the structured-text config document. Throws ValidationError with
/// a single issue when the document is structurally malformed; semantic
/// checks are left to validate_config.
[[nodiscard]] SimulationConfig parse_config(std::string_view text);

void to_json(nlohmann::json& j, const SimulationConfig& config);
void from_json(const nlohmann::json& j, SimulationConfig& config);

}  // namespace surveysim

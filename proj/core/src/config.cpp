// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#include "surveysim/config.hpp"

#include <cmath>

#include "surveysim/digest.hpp"
#include "surveysim/provider.hpp"

namespace surveysim {

namespace {

double to_seconds(Duration d) { return std::chrono::duration<double>(d).count(); }

Duration from_seconds(double s) {
  return std::chrono::duration_cast<Duration>(std::chrono::duration<double>(s));
}

void require_positive(ValidationReport& report, const char* field, std::int64_t value) {
  if (value < 1) report.add(field, "must be at least 1");
}

}  // namespace

ValidationReport validate_config(const SimulationConfig& c) {
  ValidationReport report;
  require_positive(report, "population_size", c.population_size);
  report.merge(validate_schema(c.profile_schema), "profile_schema.");

  const ProviderInfo* provider = find_provider(c.provider_id);
  if (provider == nullptr) {
    report.add("provider_id", "unknown provider \"" + c.provider_id + "\"");
  }
  if (c.model_name.empty()) report.add("model_name", "must not be empty");
  if (!std::isfinite(c.temperature) || c.temperature < 0) {
    report.add("temperature", "must be a nonnegative number");
  } else if (provider != nullptr &&
             (c.temperature < provider->min_temperature || c.temperature > provider->max_temperature)) {
    report.add("temperature", "outside the provider range [" + std::to_string(provider->min_temperature) + ", " +
                                  std::to_string(provider->max_temperature) + "]");
  }
  if (!(c.top_p > 0.0 && c.top_p <= 1.0)) report.add("top_p", "top_p out of (0,1]");
  require_positive(report, "max_output_tokens", c.max_output_tokens);
  require_positive(report, "max_concurrency", c.max_concurrency);
  require_positive(report, "rpm_limit", c.rpm_limit);
  require_positive(report, "tpm_limit", c.tpm_limit);
  require_positive(report, "buffer_size", c.buffer_size);
  if (c.format_repair_attempts < 0) report.add("format_repair_attempts", "must not be negative");

  const auto& r = c.retry;
  if (r.max_retries < 0) report.add("retry.max_retries", "must not be negative");
  if (r.base_delay < Duration::zero()) report.add("retry.base_delay", "must not be negative");
  if (r.base_delay > r.max_delay) report.add("retry.base_delay", "exceeds retry.max_delay");
  if (!(r.jitter_fraction >= 0.0 && r.jitter_fraction <= 1.0)) {
    report.add("retry.jitter_fraction", "must lie in [0,1]");
  }
  if (!(c.pricing.input_per_token >= 0.0) || !(c.pricing.output_per_token >= 0.0)) {
    report.add("pricing", "prices must be nonnegative");
  }
  if (!c.profile_template.empty() && report.ok()) {
    for (const auto& name : template_placeholders(c.profile_template)) {
      if (!placeholder_resolves(c.profile_schema, name)) {
        report.add("profile_template", "unknown placeholder <" + name + ">");
      }
    }
  }
  return report;
}

std::string config_hash(const SimulationConfig& config) {
  return sha256_hex(nlohmann::json(config).dump());
}

SimulationConfig parse_config(std::string_view text) {
  try {
    return nlohmann::json::parse(text).get<SimulationConfig>();
  } catch (const nlohmann::json::exception& e) {
    ValidationReport report;
    report.add("config", e.what());
    throw ValidationError(std::move(report));
  } catch (const ValidationError&) {
    throw;
  } catch (const Error& e) {
    ValidationReport report;
    report.add("config", e.what());
    throw ValidationError(std::move(report));
  }
}

void to_json(nlohmann::json& j, const SimulationConfig& c) {
  j = nlohmann::json{
      {"run_seed", c.run_seed},
      {"population_size", c.population_size},
      {"profile_schema", c.profile_schema},
      {"provider_id", c.provider_id},
      {"model_name", c.model_name},
      {"temperature", c.temperature},
      {"top_p", c.top_p},
      {"max_output_tokens", c.max_output_tokens},
      {"max_concurrency", c.max_concurrency},
      {"rpm_limit", c.rpm_limit},
      {"tpm_limit", c.tpm_limit},
      {"retry",
       {{"max_retries", c.retry.max_retries},
        {"base_delay", to_seconds(c.retry.base_delay)},
        {"max_delay", to_seconds(c.retry.max_delay)},
        {"jitter_fraction", c.retry.jitter_fraction}}},
      {"format_repair_attempts", c.format_repair_attempts},
      {"buffer_size", c.buffer_size},
      {"profile_template", c.profile_template},
      {"pricing", {{"input_per_token", c.pricing.input_per_token}, {"output_per_token", c.pricing.output_per_token}}},
      {"provider", {{"api_base", c.provider.api_base}, {"api_key_env", c.provider.api_key_env}}},
  };
}

void from_json(const nlohmann::json& j, SimulationConfig& c) {
  const SimulationConfig defaults;
  c = SimulationConfig{};
  c.run_seed = j.value("run_seed", defaults.run_seed);
  c.population_size = j.at("population_size").get<std::int64_t>();
  c.profile_schema = j.at("profile_schema").get<ProfileSchema>();
  c.provider_id = j.value("provider_id", defaults.provider_id);
  c.model_name = j.value("model_name", defaults.model_name);
  c.temperature = j.value("temperature", defaults.temperature);
  c.top_p = j.value("top_p", defaults.top_p);
  c.max_output_tokens = j.value("max_output_tokens", defaults.max_output_tokens);
  c.max_concurrency = j.value("max_concurrency", defaults.max_concurrency);
  c.rpm_limit = j.value("rpm_limit", defaults.rpm_limit);
  c.tpm_limit = j.value("tpm_limit", defaults.tpm_limit);
  if (j.contains("retry")) {
    const auto& r = j.at("retry");
    c.retry.max_retries = r.value("max_retries", defaults.retry.max_retries);
    c.retry.base_delay = from_seconds(r.value("base_delay", to_seconds(defaults.retry.base_delay)));
    c.retry.max_delay = from_seconds(r.value("max_delay", to_seconds(defaults.retry.max_delay)));
    c.retry.jitter_fraction = r.value("jitter_fraction", defaults.retry.jitter_fraction);
  }
  c.format_repair_attempts = j.value("format_repair_attempts", defaults.format_repair_attempts);
  c.buffer_size = j.value("buffer_size", defaults.buffer_size);
  c.profile_template = j.value("profile_template", defaults.profile_template);
  if (j.contains("pricing")) {
    const auto& p = j.at("pricing");
    c.pricing.input_per_token = p.value("input_per_token", 0.0);
    c.pricing.output_per_token = p.value("output_per_token", 0.0);
  }
  if (j.contains("provider")) {
    const auto& p = j.at("provider");
    c.provider.api_base = p.value("api_base", defaults.provider.api_base);
    c.provider.api_key_env = p.value("api_key_env", defaults.provider.api_key_env);
  }
}

}  // namespace surveysim

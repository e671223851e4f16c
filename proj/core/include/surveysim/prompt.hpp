// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "surveysim/config.hpp"
#include "surveysim/jobs.hpp"
#include "surveysim/profile.hpp"
#include "surveysim/survey.hpp"

namespace surveysim {

/// Version tag of the response-format directive. Stored with every run so
/// results can be traced to the exact instructions the model saw.
inline constexpr std::string_view kDirectiveVersion = "answer-block/v1";

struct ModelParams {
  std::string model_name;
  double temperature = 1.0;
  double top_p = 1.0;
  std::int64_t max_output_tokens = 256;

  bool operator==(const ModelParams&) const = default;
};

struct PromptPayload {
  std::string system_text;
  std::string user_text;
  ModelParams model_params;
  std::int64_t estimated_tokens = 0;

  // Routing data for the scheduler and test doubles; adapters never send it.
  JobId job;
  AnswerSchema answer_schema;

  bool operator==(const PromptPayload&) const = default;
};

using AnswerValue = std::variant<std::string, std::vector<std::string>, std::int64_t, double>;

struct ParsedAnswer {
  AnswerValue value;
  std::optional<std::string> reasoning;
  std::string raw;
};

enum class FormatErrorKind { missing_field, unparsable_value, out_of_domain };

struct FormatError {
  FormatErrorKind kind = FormatErrorKind::missing_field;
  std::string detail;
  std::string raw;

  [[nodiscard]] std::string describe() const;
};

using ParseResult = std::variant<ParsedAnswer, FormatError>;

/// ceil(code points / 4).
[[nodiscard]] std::int64_t estimate_tokens(std::string_view text);

/// The fixed response-format instructions for one answer schema.
[[nodiscard]] std::string format_directive(const AnswerSchema& schema);

[[nodiscard]] PromptPayload build_prompt(const AgentProfile& profile, const SurveyQuestion& question,
                                         const SimulationConfig& config);

/// Pulls the `answer:` and `reasoning:` fields out of a response (prose
/// around a fenced block is ignored) and validates the value.
[[nodiscard]] ParseResult parse_response(std::string_view raw, const AnswerSchema& schema);

/// Follow-up after a malformed reply: the original request plus the rejected
/// output and a restated directive, at temperature 0.
[[nodiscard]] PromptPayload build_repair_prompt(const PromptPayload& original, std::string_view raw,
                                                const FormatError& error, std::int64_t attempt);

[[nodiscard]] bool answer_satisfies(const AnswerValue& value, const AnswerSchema& schema);

/// Canonical text of an answer: labels verbatim, multi-choice joined with
/// "|", numbers in shortest round-trip form.
[[nodiscard]] std::string format_answer_value(const AnswerValue& value);

/// Inverse of format_answer_value for a given schema.
[[nodiscard]] std::optional<AnswerValue> parse_answer_value(std::string_view text, const AnswerSchema& schema);

[[nodiscard]] std::string_view to_string(FormatErrorKind kind);

}  // namespace surveysim

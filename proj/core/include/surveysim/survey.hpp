// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace surveysim {

enum class AnswerKind { single_choice, multi_choice, likert, numeric_range, free_text };

/// What a well-formed answer looks like. Choice kinds use `options`, likert
/// uses the inclusive integer `scale`, numeric-range the real `bounds`.
struct AnswerSchema {
  AnswerKind kind = AnswerKind::free_text;
  std::vector<std::string> options;
  std::int64_t scale_low = 0;
  std::int64_t scale_high = 0;
  double bounds_low = 0.0;
  double bounds_high = 0.0;

  bool operator==(const AnswerSchema&) const = default;

  static AnswerSchema single_choice(std::vector<std::string> options);
  static AnswerSchema multi_choice(std::vector<std::string> options);
  static AnswerSchema likert(std::int64_t low, std::int64_t high);
  static AnswerSchema numeric_range(double low, double high);
  static AnswerSchema free_text();
};

struct SurveyQuestion {
  std::string question_id;
  std::string text;
  std::string answer_instruction;
  AnswerSchema answer_schema;

  bool operator==(const SurveyQuestion&) const = default;
};

struct SurveySpec {
  std::vector<SurveyQuestion> questions;

  bool operator==(const SurveySpec&) const = default;
  [[nodiscard]] std::size_t size() const { return questions.size(); }
};

enum class SurveyFormat { delimited_table, structured_text };

/// Parses an uploaded questionnaire. The delimited table needs a header row
/// naming question_id, text, answer_kind, options and answer_instruction (any
/// order); options are "|" separated, likert and numeric-range put "low|high"
/// there. Every malformed row is reported; throws ParseError.
[[nodiscard]] SurveySpec parse_survey_document(std::string_view bytes, SurveyFormat format);

[[nodiscard]] std::string serialize_survey(const SurveySpec& survey, SurveyFormat format);

[[nodiscard]] std::string_view to_string(AnswerKind kind);
[[nodiscard]] std::string_view to_string(SurveyFormat format);
[[nodiscard]] AnswerKind parse_answer_kind(std::string_view s);
[[nodiscard]] SurveyFormat parse_survey_format(std::string_view s);

/// Picks the format from a file name: ".csv" is a delimited table, anything
/// else structured text.
[[nodiscard]] SurveyFormat survey_format_for_path(std::string_view path);

void to_json(nlohmann::json& j, const AnswerSchema& schema);
void from_json(const nlohmann::json& j, AnswerSchema& schema);

}  // namespace surveysim

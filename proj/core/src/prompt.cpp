// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#include "surveysim/prompt.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>

namespace surveysim {

namespace {

constexpr std::string_view kRoleFraming =
    "You are taking part in a survey as the person described below. Answer every question in character, "
    "based only on this description.";

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string unquote(std::string s) {
  if (s.size() >= 2) {
    const char f = s.front();
    const char b = s.back();
    if ((f == '"' && b == '"') || (f == '\'' && b == '\'') || (f == '`' && b == '`')) {
      return trim(std::string_view(s).substr(1, s.size() - 2));
    }
  }
  return s;
}

std::string shortest(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i != 0) out += sep;
    out += items[i];
  }
  return out;
}

bool iequals_prefix(std::string_view line, std::string_view key) {
  if (line.size() < key.size()) return false;
  for (std::size_t i = 0; i < key.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(line[i])) != key[i]) return false;
  }
  return true;
}

// If `line` is "<key>:" or "<key>=" (case-insensitive, optional markdown
// emphasis around the key), returns the text after the separator.
std::optional<std::string> field_value(std::string_view line, std::string_view key) {
  std::string l = trim(line);
  std::string_view v = l;
  while (!v.empty() && (v.front() == '*' || v.front() == '-' || v.front() == '_')) v.remove_prefix(1);
  if (!iequals_prefix(v, key)) return std::nullopt;
  v.remove_prefix(key.size());
  while (!v.empty() && (v.front() == '*' || v.front() == '_')) v.remove_prefix(1);
  while (!v.empty() && v.front() == ' ') v.remove_prefix(1);
  if (v.empty() || (v.front() != ':' && v.front() != '=')) return std::nullopt;
  v.remove_prefix(1);
  return trim(v);
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

// Candidate regions to search for fields: fenced blocks first (an "answer"
// tagged block before untagged ones), then the whole text.
std::vector<std::string_view> candidate_regions(std::string_view raw) {
  std::vector<std::string_view> tagged;
  std::vector<std::string_view> untagged;
  std::size_t pos = 0;
  while (true) {
    const auto open = raw.find("```", pos);
    if (open == std::string_view::npos) break;
    const auto info_end = raw.find('\n', open + 3);
    if (info_end == std::string_view::npos) break;
    const auto close = raw.find("```", info_end + 1);
    if (close == std::string_view::npos) break;
    const std::string info = trim(raw.substr(open + 3, info_end - open - 3));
    const auto body = raw.substr(info_end + 1, close - info_end - 1);
    (iequals_prefix(info, "answer") ? tagged : untagged).push_back(body);
    pos = close + 3;
  }
  tagged.insert(tagged.end(), untagged.begin(), untagged.end());
  tagged.push_back(raw);
  return tagged;
}

FormatError make_error(FormatErrorKind kind, std::string detail, std::string_view raw) {
  return FormatError{kind, std::move(detail), std::string(raw)};
}

std::variant<AnswerValue, FormatError> interpret(const std::string& text, const AnswerSchema& schema,
                                                 std::string_view raw) {
  if (text.empty()) return make_error(FormatErrorKind::unparsable_value, "the answer is empty", raw);
  switch (schema.kind) {
    case AnswerKind::single_choice:
      if (std::find(schema.options.begin(), schema.options.end(), text) == schema.options.end()) {
        return make_error(FormatErrorKind::out_of_domain,
                          "\"" + text + "\" is not one of: " + join(schema.options, ", "), raw);
      }
      return AnswerValue(text);
    case AnswerKind::multi_choice: {
      std::vector<std::string> picks;
      std::set<std::string> seen;
      std::size_t start = 0;
      while (true) {
        const auto comma = text.find(',', start);
        std::string item =
            unquote(trim(std::string_view(text).substr(start, comma == std::string::npos ? std::string::npos
                                                                                           : comma - start)));
        if (item.empty()) return make_error(FormatErrorKind::unparsable_value, "empty item in choice list", raw);
        if (std::find(schema.options.begin(), schema.options.end(), item) == schema.options.end()) {
          return make_error(FormatErrorKind::out_of_domain,
                            "\"" + item + "\" is not one of: " + join(schema.options, ", "), raw);
        }
        if (!seen.insert(item).second) {
          return make_error(FormatErrorKind::unparsable_value, "\"" + item + "\" listed twice", raw);
        }
        picks.push_back(std::move(item));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      return AnswerValue(std::move(picks));
    }
    case AnswerKind::likert: {
      std::int64_t v = 0;
      auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc{} || ptr != text.data() + text.size()) {
        return make_error(FormatErrorKind::unparsable_value, "\"" + text + "\" is not an integer", raw);
      }
      if (v < schema.scale_low || v > schema.scale_high) {
        return make_error(FormatErrorKind::out_of_domain,
                          std::to_string(v) + " is outside " + std::to_string(schema.scale_low) + ".." +
                              std::to_string(schema.scale_high),
                          raw);
      }
      return AnswerValue(v);
    }
    case AnswerKind::numeric_range: {
      double v = 0;
      auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
        return make_error(FormatErrorKind::unparsable_value, "\"" + text + "\" is not a number", raw);
      }
      if (v < schema.bounds_low || v > schema.bounds_high) {
        return make_error(FormatErrorKind::out_of_domain,
                          text + " is outside " + shortest(schema.bounds_low) + ".." + shortest(schema.bounds_high),
                          raw);
      }
      return AnswerValue(v);
    }
    case AnswerKind::free_text:
      return AnswerValue(text);
  }
  return make_error(FormatErrorKind::unparsable_value, "unsupported answer kind", raw);
}

}  // namespace

std::string_view to_string(FormatErrorKind kind) {
  switch (kind) {
    case FormatErrorKind::missing_field: return "missing-field";
    case FormatErrorKind::unparsable_value: return "unparsable-value";
    case FormatErrorKind::out_of_domain: return "out-of-domain";
  }
  return "?";
}

std::string FormatError::describe() const { return std::string(to_string(kind)) + ": " + detail; }

std::int64_t estimate_tokens(std::string_view text) {
  std::int64_t code_points = 0;
  for (unsigned char c : text) {
    if ((c & 0xC0) != 0x80) ++code_points;
  }
  return (code_points + 3) / 4;
}

std::string format_directive(const AnswerSchema& schema) {
  std::string rule;
  switch (schema.kind) {
    case AnswerKind::single_choice:
      rule = "The answer must be exactly one of: " + join(schema.options, ", ") + ".";
      break;
    case AnswerKind::multi_choice:
      rule = "The answer must be one or more of: " + join(schema.options, ", ") + ", separated by commas.";
      break;
    case AnswerKind::likert:
      rule = "The answer must be an integer from " + std::to_string(schema.scale_low) + " to " +
             std::to_string(schema.scale_high) + ".";
      break;
    case AnswerKind::numeric_range:
      rule = "The answer must be a number from " + shortest(schema.bounds_low) + " to " +
             shortest(schema.bounds_high) + ".";
      break;
    case AnswerKind::free_text:
      rule = "The answer must be a short free-text response on a single line.";
      break;
  }
  return "Reply with a fenced block in exactly this form:\n"
         "```answer\n"
         "answer: (your answer)\n"
         "reasoning: (one or two sentences explaining your answer)\n"
         "```\n" +
         rule;
}

PromptPayload build_prompt(const AgentProfile& profile, const SurveyQuestion& question,
                           const SimulationConfig& config) {
  const std::string& tmpl =
      config.profile_template.empty() ? default_profile_template(config.profile_schema) : config.profile_template;
  PromptPayload p;
  p.system_text = std::string(kRoleFraming) + "\n\n" + render_profile_prompt(profile, config.profile_schema, tmpl);
  p.user_text = question.text;
  if (!question.answer_instruction.empty()) p.user_text += "\n\n" + question.answer_instruction;
  p.user_text += "\n\n" + format_directive(question.answer_schema);
  p.model_params = ModelParams{config.model_name, config.temperature, config.top_p, config.max_output_tokens};
  p.estimated_tokens = estimate_tokens(p.system_text) + estimate_tokens(p.user_text);
  p.job = JobId{profile.agent_id, question.question_id};
  p.answer_schema = question.answer_schema;
  return p;
}

ParseResult parse_response(std::string_view raw, const AnswerSchema& schema) {
  for (const auto region : candidate_regions(raw)) {
    const auto lines = split_lines(region);
    std::optional<std::string> answer;
    std::optional<std::string> reasoning;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (!answer) {
        if (auto v = field_value(lines[i], "answer")) {
          answer = std::move(v);
          continue;
        }
      }
      if (answer && !reasoning) {
        if (auto v = field_value(lines[i], "reasoning")) {
          std::string text = *v;
          // Reasoning runs to the end of the region.
          for (std::size_t k = i + 1; k < lines.size(); ++k) {
            text += "\n";
            text += lines[k];
          }
          reasoning = trim(text);
          break;
        }
      }
    }
    if (!answer) continue;
    auto value = interpret(unquote(*answer), schema, raw);
    if (auto* err = std::get_if<FormatError>(&value)) return std::move(*err);
    return ParsedAnswer{std::get<AnswerValue>(std::move(value)), std::move(reasoning), std::string(raw)};
  }
  return make_error(FormatErrorKind::missing_field, "no \"answer:\" field found", raw);
}

PromptPayload build_repair_prompt(const PromptPayload& original, std::string_view raw, const FormatError& error,
                                  std::int64_t attempt) {
  (void)attempt;
  PromptPayload p = original;
  p.user_text += "\n\nYour previous reply was:\n";
  p.user_text += raw;
  p.user_text += "\n\nThat reply could not be accepted (" + error.describe() + ").\n";
  p.user_text += "Answer the same question again, following the format exactly.\n\n";
  p.user_text += format_directive(original.answer_schema);
  p.model_params.temperature = 0.0;
  p.estimated_tokens = estimate_tokens(p.system_text) + estimate_tokens(p.user_text);
  return p;
}

bool answer_satisfies(const AnswerValue& value, const AnswerSchema& schema) {
  const auto has = [&](const std::string& s) {
    return std::find(schema.options.begin(), schema.options.end(), s) != schema.options.end();
  };
  switch (schema.kind) {
    case AnswerKind::single_choice: {
      const auto* v = std::get_if<std::string>(&value);
      return v != nullptr && has(*v);
    }
    case AnswerKind::multi_choice: {
      const auto* v = std::get_if<std::vector<std::string>>(&value);
      if (v == nullptr || v->empty()) return false;
      std::set<std::string> seen;
      return std::all_of(v->begin(), v->end(), [&](const std::string& s) { return has(s) && seen.insert(s).second; });
    }
    case AnswerKind::likert: {
      const auto* v = std::get_if<std::int64_t>(&value);
      return v != nullptr && *v >= schema.scale_low && *v <= schema.scale_high;
    }
    case AnswerKind::numeric_range: {
      const auto* v = std::get_if<double>(&value);
      return v != nullptr && std::isfinite(*v) && *v >= schema.bounds_low && *v <= schema.bounds_high;
    }
    case AnswerKind::free_text: {
      const auto* v = std::get_if<std::string>(&value);
      return v != nullptr && !v->empty();
    }
  }
  return false;
}

std::string format_answer_value(const AnswerValue& value) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::string>) {
          return v;
        } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
          return join(v, "|");
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(v);
        } else {
          return shortest(v);
        }
      },
      value);
}

std::optional<AnswerValue> parse_answer_value(std::string_view text, const AnswerSchema& schema) {
  switch (schema.kind) {
    case AnswerKind::single_choice:
    case AnswerKind::free_text:
      return AnswerValue(std::string(text));
    case AnswerKind::multi_choice: {
      std::vector<std::string> items;
      std::size_t start = 0;
      while (true) {
        const auto bar = text.find('|', start);
        items.emplace_back(text.substr(start, bar == std::string_view::npos ? std::string_view::npos : bar - start));
        if (bar == std::string_view::npos) break;
        start = bar + 1;
      }
      return AnswerValue(std::move(items));
    }
    case AnswerKind::likert: {
      std::int64_t v = 0;
      auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
      return AnswerValue(v);
    }
    case AnswerKind::numeric_range: {
      double v = 0;
      auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
      return AnswerValue(v);
    }
  }
  return std::nullopt;
}

}  // namespace surveysim

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#include "surveysim/survey.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>

#include "surveysim/csv.hpp"
#include "surveysim/errors.hpp"

namespace surveysim {

AnswerSchema AnswerSchema::single_choice(std::vector<std::string> options) {
  AnswerSchema s;
  s.kind = AnswerKind::single_choice;
  s.options = std::move(options);
  return s;
}

AnswerSchema AnswerSchema::multi_choice(std::vector<std::string> options) {
  AnswerSchema s;
  s.kind = AnswerKind::multi_choice;
  s.options = std::move(options);
  return s;
}

AnswerSchema AnswerSchema::likert(std::int64_t low, std::int64_t high) {
  AnswerSchema s;
  s.kind = AnswerKind::likert;
  s.scale_low = low;
  s.scale_high = high;
  return s;
}

AnswerSchema AnswerSchema::numeric_range(double low, double high) {
  AnswerSchema s;
  s.kind = AnswerKind::numeric_range;
  s.bounds_low = low;
  s.bounds_high = high;
  return s;
}

AnswerSchema AnswerSchema::free_text() { return AnswerSchema{}; }

std::string_view to_string(AnswerKind kind) {
  switch (kind) {
    case AnswerKind::single_choice: return "single-choice";
    case AnswerKind::multi_choice: return "multi-choice";
    case AnswerKind::likert: return "likert";
    case AnswerKind::numeric_range: return "numeric-range";
    case AnswerKind::free_text: return "free-text";
  }
  return "?";
}

std::string_view to_string(SurveyFormat format) {
  return format == SurveyFormat::delimited_table ? "delimited-table" : "structured-text";
}

AnswerKind parse_answer_kind(std::string_view s) {
  for (auto k : {AnswerKind::single_choice, AnswerKind::multi_choice, AnswerKind::likert,
                 AnswerKind::numeric_range, AnswerKind::free_text}) {
    if (to_string(k) == s) return k;
  }
  throw Error("unknown answer kind \"" + std::string(s) + "\"");
}

SurveyFormat parse_survey_format(std::string_view s) {
  if (s == "delimited-table" || s == "csv") return SurveyFormat::delimited_table;
  if (s == "structured-text" || s == "json") return SurveyFormat::structured_text;
  throw Error("unknown survey format \"" + std::string(s) + "\"");
}

SurveyFormat survey_format_for_path(std::string_view path) {
  const auto dot = path.rfind('.');
  if (dot != std::string_view::npos) {
    std::string ext(path.substr(dot + 1));
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == "csv") return SurveyFormat::delimited_table;
  }
  return SurveyFormat::structured_text;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_bar(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto bar = s.find('|', start);
    out.push_back(trim(s.substr(start, bar == std::string_view::npos ? std::string_view::npos : bar - start)));
    if (bar == std::string_view::npos) break;
    start = bar + 1;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

// Empty string when valid.
std::string check_answer_schema(const AnswerSchema& s) {
  switch (s.kind) {
    case AnswerKind::single_choice:
    case AnswerKind::multi_choice: {
      if (s.options.size() < 2) return "choice questions need at least 2 options";
      std::set<std::string> seen;
      for (const auto& o : s.options) {
        if (o.empty()) return "empty option label";
        if (!seen.insert(o).second) return "duplicate option \"" + o + "\"";
        if (s.kind == AnswerKind::multi_choice && (o.find(',') != std::string::npos)) {
          return "multi-choice option \"" + o + "\" may not contain a comma";
        }
      }
      return {};
    }
    case AnswerKind::likert:
      if (!(s.scale_low < s.scale_high)) return "likert scale needs low < high";
      return {};
    case AnswerKind::numeric_range:
      if (!(s.bounds_low <= s.bounds_high)) return "numeric range needs low <= high";
      return {};
    case AnswerKind::free_text:
      return {};
  }
  return {};
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string options_cell(const AnswerSchema& s) {
  switch (s.kind) {
    case AnswerKind::single_choice:
    case AnswerKind::multi_choice: {
      std::string out;
      for (std::size_t i = 0; i < s.options.size(); ++i) {
        if (i != 0) out += '|';
        out += s.options[i];
      }
      return out;
    }
    case AnswerKind::likert:
      return std::to_string(s.scale_low) + "|" + std::to_string(s.scale_high);
    case AnswerKind::numeric_range:
      return format_double(s.bounds_low) + "|" + format_double(s.bounds_high);
    case AnswerKind::free_text:
      return {};
  }
  return {};
}

SurveySpec parse_table(std::string_view bytes) {
  const auto rows = csv::parse(bytes);
  if (rows.empty()) throw ParseError({{0, "no questions found"}});

  const std::vector<std::string> required{"question_id", "text", "answer_kind", "options", "answer_instruction"};
  std::map<std::string, std::size_t> column;
  for (std::size_t c = 0; c < rows[0].size(); ++c) column[trim(rows[0][c])] = c;
  std::vector<ParseError::Entry> errors;
  for (const auto& name : required) {
    if (!column.contains(name)) errors.push_back({1, "header is missing column \"" + name + "\""});
  }
  if (!errors.empty()) throw ParseError(std::move(errors));

  SurveySpec spec;
  std::map<std::string, std::size_t> first_row;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::size_t line = r + 1;
    if (row.size() == 1 && trim(row[0]).empty()) continue;
    if (row.size() != rows[0].size()) {
      errors.push_back({line, "expected " + std::to_string(rows[0].size()) + " fields, found " +
                                  std::to_string(row.size())});
      continue;
    }
    SurveyQuestion q;
    q.question_id = trim(row[column["question_id"]]);
    q.text = trim(row[column["text"]]);
    q.answer_instruction = trim(row[column["answer_instruction"]]);
    const std::string kind = trim(row[column["answer_kind"]]);
    const std::string options = row[column["options"]];

    if (q.question_id.empty()) {
      errors.push_back({line, "empty question_id"});
      continue;
    }
    if (auto [it, inserted] = first_row.emplace(q.question_id, line); !inserted) {
      errors.push_back({line, "duplicate question_id \"" + q.question_id + "\" (first defined on row " +
                                  std::to_string(it->second) + ")"});
      continue;
    }
    if (q.text.empty()) {
      errors.push_back({line, "empty question text"});
      continue;
    }
    try {
      q.answer_schema.kind = parse_answer_kind(kind);
    } catch (const Error& e) {
      errors.push_back({line, e.what()});
      continue;
    }
    auto& s = q.answer_schema;
    switch (s.kind) {
      case AnswerKind::single_choice:
      case AnswerKind::multi_choice:
        s.options = split_bar(options);
        break;
      case AnswerKind::likert:
      case AnswerKind::numeric_range: {
        const auto parts = split_bar(options);
        bool ok = parts.size() == 2;
        if (ok && s.kind == AnswerKind::likert) {
          ok = parse_number(parts[0], s.scale_low) && parse_number(parts[1], s.scale_high);
        } else if (ok) {
          ok = parse_number(parts[0], s.bounds_low) && parse_number(parts[1], s.bounds_high);
        }
        if (!ok) {
          errors.push_back({line, "options must be \"low|high\" for " + kind});
          continue;
        }
        break;
      }
      case AnswerKind::free_text:
        break;
    }
    if (auto problem = check_answer_schema(s); !problem.empty()) {
      errors.push_back({line, problem});
      continue;
    }
    spec.questions.push_back(std::move(q));
  }
  if (!errors.empty()) throw ParseError(std::move(errors));
  if (spec.questions.empty()) throw ParseError({{0, "no questions found"}});
  return spec;
}

SurveySpec parse_structured(std::string_view bytes) {
  if (trim(bytes).empty()) throw ParseError({{0, "no questions found"}});
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError({{0, std::string("malformed document: ") + e.what()}});
  }
  const nlohmann::json* list = &doc;
  if (doc.is_object()) {
    if (!doc.contains("questions")) throw ParseError({{0, "document has no \"questions\" list"}});
    list = &doc["questions"];
  }
  if (!list->is_array()) throw ParseError({{0, "\"questions\" must be a list"}});

  SurveySpec spec;
  std::vector<ParseError::Entry> errors;
  std::map<std::string, std::size_t> first_entry;
  for (std::size_t i = 0; i < list->size(); ++i) {
    const auto& jq = (*list)[i];
    const std::size_t entry = i + 1;
    try {
      SurveyQuestion q;
      q.question_id = jq.at("question_id").get<std::string>();
      q.text = jq.at("text").get<std::string>();
      q.answer_instruction = jq.value("answer_instruction", "");
      q.answer_schema = jq.at("answer_schema").get<AnswerSchema>();
      if (q.question_id.empty()) {
        errors.push_back({entry, "empty question_id"});
        continue;
      }
      if (auto [it, inserted] = first_entry.emplace(q.question_id, entry); !inserted) {
        errors.push_back({entry, "duplicate question_id \"" + q.question_id + "\" (first defined in entry " +
                                     std::to_string(it->second) + ")"});
        continue;
      }
      if (trim(q.text).empty()) {
        errors.push_back({entry, "empty question text"});
        continue;
      }
      if (auto problem = check_answer_schema(q.answer_schema); !problem.empty()) {
        errors.push_back({entry, problem});
        continue;
      }
      spec.questions.push_back(std::move(q));
    } catch (const nlohmann::json::exception& e) {
      errors.push_back({entry, e.what()});
    } catch (const Error& e) {
      errors.push_back({entry, e.what()});
    }
  }
  if (!errors.empty()) throw ParseError(std::move(errors));
  if (spec.questions.empty()) throw ParseError({{0, "no questions found"}});
  return spec;
}

}  // namespace

SurveySpec parse_survey_document(std::string_view bytes, SurveyFormat format) {
  return format == SurveyFormat::delimited_table ? parse_table(bytes) : parse_structured(bytes);
}

std::string serialize_survey(const SurveySpec& survey, SurveyFormat format) {
  if (format == SurveyFormat::delimited_table) {
    std::string out = csv::format_row({"question_id", "text", "answer_kind", "options", "answer_instruction"});
    for (const auto& q : survey.questions) {
      out += csv::format_row({q.question_id, q.text, std::string(to_string(q.answer_schema.kind)),
                              options_cell(q.answer_schema), q.answer_instruction});
    }
    return out;
  }
  nlohmann::json list = nlohmann::json::array();
  for (const auto& q : survey.questions) {
    list.push_back({{"question_id", q.question_id},
                    {"text", q.text},
                    {"answer_instruction", q.answer_instruction},
                    {"answer_schema", q.answer_schema}});
  }
  return nlohmann::json{{"questions", list}}.dump(2) + "\n";
}

void to_json(nlohmann::json& j, const AnswerSchema& s) {
  j = nlohmann::json{{"kind", to_string(s.kind)}};
  switch (s.kind) {
    case AnswerKind::single_choice:
    case AnswerKind::multi_choice:
      j["options"] = s.options;
      break;
    case AnswerKind::likert:
      j["scale"] = {s.scale_low, s.scale_high};
      break;
    case AnswerKind::numeric_range:
      j["bounds"] = {s.bounds_low, s.bounds_high};
      break;
    case AnswerKind::free_text:
      break;
  }
}

void from_json(const nlohmann::json& j, AnswerSchema& s) {
  s = AnswerSchema{};
  s.kind = parse_answer_kind(j.at("kind").get<std::string>());
  switch (s.kind) {
    case AnswerKind::single_choice:
    case AnswerKind::multi_choice:
      s.options = j.at("options").get<std::vector<std::string>>();
      break;
    case AnswerKind::likert: {
      const auto& sc = j.at("scale");
      s.scale_low = sc.at(0).get<std::int64_t>();
      s.scale_high = sc.at(1).get<std::int64_t>();
      break;
    }
    case AnswerKind::numeric_range: {
      const auto& b = j.at("bounds");
      s.bounds_low = b.at(0).get<double>();
      s.bounds_high = b.at(1).get<double>();
      break;
    }
    case AnswerKind::free_text:
      break;
  }
}

}  // namespace surveysim

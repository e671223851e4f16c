// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#include "surveysim/export.hpp"

#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "surveysim/csv.hpp"
#include "surveysim/errors.hpp"
#include "surveysim/prompt.hpp"

namespace surveysim {

ExportFormat parse_export_format(std::string_view s) {
  if (s == "csv") return ExportFormat::csv;
  if (s == "jsonl") return ExportFormat::jsonl;
  throw std::invalid_argument("unknown export format: " + std::string(s));
}

const std::vector<std::string>& results_columns() {
  static const std::vector<std::string> columns = {
      "agent_id",     "question_id",   "value",  "reasoning",   "attempts",         "repairs",
      "input_tokens", "output_tokens", "status", "config_hash", "directive_version"};
  return columns;
}

ResultsWriter::ResultsWriter(std::ostream& out, ExportFormat format, std::string config_hash)
    : out_(out), format_(format), config_hash_(std::move(config_hash)) {}

void ResultsWriter::write(const AnswerRecord& r) {
  if (format_ == ExportFormat::csv) {
    if (!header_written_) {
      out_ << csv::format_row(results_columns());
      header_written_ = true;
    }
    out_ << csv::format_row({r.job.agent_id, r.job.question_id, r.value, r.reasoning.value_or(""),
                             std::to_string(r.attempts), std::to_string(r.repairs),
                             std::to_string(r.usage.input_tokens), std::to_string(r.usage.output_tokens), r.status,
                             r.config_hash, r.directive_version});
    return;
  }
  if (!header_written_) {
    const nlohmann::json header{{"kind", "header"},
                                {"config_hash", r.config_hash.empty() ? config_hash_ : r.config_hash},
                                {"directive_version", r.directive_version.empty()
                                                          ? std::string(kDirectiveVersion)
                                                          : r.directive_version}};
    out_ << header.dump() << '\n';
    header_written_ = true;
  }
  const nlohmann::json line{{"kind", "answer"},
                            {"agent_id", r.job.agent_id},
                            {"question_id", r.job.question_id},
                            {"value", r.value},
                            {"reasoning", r.reasoning ? nlohmann::json(*r.reasoning) : nlohmann::json(nullptr)},
                            {"raw", r.raw},
                            {"attempts", r.attempts},
                            {"repairs", r.repairs},
                            {"input_tokens", r.usage.input_tokens},
                            {"output_tokens", r.usage.output_tokens},
                            {"status", r.status}};
  out_ << line.dump() << '\n';
}

void ResultsWriter::finish() {
  if (header_written_) return;
  if (format_ == ExportFormat::csv) {
    out_ << csv::format_row(results_columns());
  } else {
    const nlohmann::json header{
        {"kind", "header"}, {"config_hash", config_hash_}, {"directive_version", std::string(kDirectiveVersion)}};
    out_ << header.dump() << '\n';
  }
  header_written_ = true;
}

std::string export_results(const std::vector<AnswerRecord>& records, ExportFormat format,
                           const std::string& config_hash) {
  std::ostringstream out;
  ResultsWriter writer(out, format, config_hash);
  for (const auto& r : records) writer.write(r);
  writer.finish();
  return out.str();
}

std::vector<AnswerRecord> parse_results_csv(std::string_view text) {
  const auto rows = csv::parse(text);
  if (rows.empty() || rows.front() != results_columns()) {
    throw ParseError({{1, "results table header does not match the expected columns"}});
  }
  std::vector<AnswerRecord> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() != results_columns().size()) {
      throw ParseError({{i + 1, "expected " + std::to_string(results_columns().size()) + " fields"}});
    }
    AnswerRecord r;
    r.job = {row[0], row[1]};
    r.value = row[2];
    if (!row[3].empty()) r.reasoning = row[3];
    r.attempts = std::stoll(row[4]);
    r.repairs = std::stoll(row[5]);
    r.usage = {std::stoll(row[6]), std::stoll(row[7])};
    r.status = row[8];
    r.config_hash = row[9];
    r.directive_version = row[10];
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace surveysim

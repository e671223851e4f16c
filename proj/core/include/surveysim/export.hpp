// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "surveysim/records.hpp"

namespace surveysim {

enum class ExportFormat { csv, jsonl };

[[nodiscard]] ExportFormat parse_export_format(std::string_view s);

/// Column order of the results table.
[[nodiscard]] const std::vector<std::string>& results_columns();

/// Exports hold no run ids or timestamps so that a CLI run and a service run
/// of the same inputs export identical bytes. `config_hash` fills the header
/// of a JSONL export that has no records.
class ResultsWriter {
 public:
  ResultsWriter(std::ostream& out, ExportFormat format, std::string config_hash);
  void write(const AnswerRecord& record);
  void finish();

 private:
  std::ostream& out_;
  ExportFormat format_;
  std::string config_hash_;
  bool header_written_ = false;
};

[[nodiscard]] std::string export_results(const std::vector<AnswerRecord>& records, ExportFormat format,
                                         const std::string& config_hash);

/// Parses a results table produced by export_results back into
/// (agent_id, question_id, value, ...) rows; used by tests and tools.
[[nodiscard]] std::vector<AnswerRecord> parse_results_csv(std::string_view text);

}  // namespace surveysim

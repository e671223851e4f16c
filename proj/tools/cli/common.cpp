// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#include "common.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace surveysim::cli {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

SimulationConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides) {
  SimulationConfig parsed = parse_config(read_file(path));
  // Same normalisation the service applies, so both report the same hash.
  nlohmann::json j = parsed;
  auto config = j.get<SimulationConfig>();
  if (overrides.seed) config.run_seed = *overrides.seed;
  if (overrides.force_mock) config.provider_id = "mock";
  ValidationReport report = validate_config(config);
  if (!report.ok()) throw ValidationError(std::move(report));
  return config;
}

SurveySpec load_survey(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  return parse_survey_document(text, survey_format_for_path(path.string()));
}

void print_report(const ValidationReport& report) {
  for (const auto& issue : report.issues) {
    std::cerr << "  " << issue.subject << ": " << issue.message << '\n';
  }
}

void print_parse_error(const std::string& what, const ParseError& e) {
  std::cerr << what << " has " << e.entries().size() << " bad row(s):\n";
  for (const auto& entry : e.entries()) {
    std::cerr << "  row " << entry.row << ": " << entry.message << '\n';
  }
}

}  // namespace surveysim::cli

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#include <iostream>

#include "common.hpp"
#include "surveysim/profile.hpp"

namespace surveysim::cli {

ExitStatus cmd_validate(const ValidateOptions& o) {
  ValidationReport report;
  std::optional<SimulationConfig> config;
  try {
    config = load_config(o.config);
  } catch (const ValidationError& e) {
    report.merge(e.report(), "config: ");
  } catch (const Error& e) {
    report.add("config", e.what());
  }

  std::size_t questions = 0;
  if (o.survey) {
    try {
      questions = load_survey(*o.survey).questions.size();
      if (questions == 0) report.add("survey", "has no questions");
    } catch (const ParseError& e) {
      for (const auto& entry : e.entries()) report.add("survey: row " + std::to_string(entry.row), entry.message);
    } catch (const Error& e) {
      report.add("survey", e.what());
    }
  }

  std::size_t agents = 0;
  if (o.population && config) {
    try {
      agents = population_from_csv(read_file(*o.population), config->profile_schema).size();
    } catch (const ParseError& e) {
      for (const auto& entry : e.entries()) {
        report.add("population: row " + std::to_string(entry.row), entry.message);
      }
    } catch (const Error& e) {
      report.add("population", e.what());
    }
  }

  if (!report.ok()) {
    std::cerr << report.issues.size() << " problem(s) found:\n";
    print_report(report);
    return ExitStatus::invalid_input;
  }
  std::cout << "config ok (hash " << config_hash(*config) << ")\n";
  if (o.survey) std::cout << "questionnaire ok (" << questions << " questions)\n";
  if (o.population) std::cout << "population ok (" << agents << " agents)\n";
  return ExitStatus::ok;
}

}  // namespace surveysim::cli

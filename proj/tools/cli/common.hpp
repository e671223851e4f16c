// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "surveysim/config.hpp"
#include "surveysim/errors.hpp"
#include "surveysim/survey.hpp"

namespace surveysim::cli {

enum class ExitStatus : int {
  ok = 0,
  invalid_input = 1,
  // A manifest path has been printed so the run can be resumed or inspected.
  partial = 2,
  internal_error = 3,
};

[[nodiscard]] inline int code(ExitStatus s) { return static_cast<int>(s); }

/// Throws Error naming the path when the file cannot be read.
[[nodiscard]] std::string read_file(const std::filesystem::path& path);

/// Parses, canonicalizes and validates a configuration document. Overrides
/// are applied before validation. Throws ValidationError.
struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  bool force_mock = false;
};
[[nodiscard]] SimulationConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides = {});

/// Picks the questionnaire format from the file extension. Throws ParseError.
[[nodiscard]] SurveySpec load_survey(const std::filesystem::path& path);

void print_report(const ValidationReport& report);
void print_parse_error(const std::string& what, const ParseError& e);

struct RunOptions {
  std::filesystem::path config;
  std::filesystem::path survey;
  std::filesystem::path out;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> resume;
  bool mock = false;
  std::optional<std::filesystem::path> mock_script;
  std::optional<std::filesystem::path> population;
  bool virtual_time = false;
  bool quiet = false;
};

struct GenerateOptions {
  std::filesystem::path schema;
  std::int64_t n = 0;
  std::uint64_t seed = 0;
  std::filesystem::path out;
};

struct ValidateOptions {
  std::filesystem::path config;
  std::optional<std::filesystem::path> survey;
  std::optional<std::filesystem::path> population;
};

struct ServeOptions {
  std::filesystem::path data;
  std::string host = "127.0.0.1";
  int port = 8080;
};

ExitStatus cmd_run(const RunOptions& options);
ExitStatus cmd_generate_profiles(const GenerateOptions& options);
ExitStatus cmd_validate(const ValidateOptions& options);
ExitStatus cmd_serve(const ServeOptions& options);

}  // namespace surveysim::cli

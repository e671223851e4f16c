// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "common.hpp"
#include "signals.hpp"

using namespace surveysim::cli;

int main(int argc, char** argv) {
  block_termination_signals();

  CLI::App app{"surveysim: synthetic survey respondents driven by language models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "surveysim 0.1.0");

  RunOptions run;
  std::string resume;
  std::string mock_script;
  std::string population;
  std::uint64_t seed = 0;
  auto* run_cmd = app.add_subcommand("run", "Run a simulation and write results to a directory");
  run_cmd->add_option("--config", run.config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--survey", run.survey, "Questionnaire (.csv table or JSON)")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--out", run.out, "Output directory")->required();
  auto* seed_opt = run_cmd->add_option("--seed", seed, "Override the configured run seed");
  run_cmd->add_option("--resume", resume, "Continue the run recorded in this manifest")->check(CLI::ExistingFile);
  run_cmd->add_flag("--mock", run.mock, "Use the mock provider whatever the configuration says");
  run_cmd->add_option("--mock-script", mock_script, "Scripted mock behaviour (JSON)")->check(CLI::ExistingFile);
  run_cmd->add_option("--population", population, "Use this population table instead of generating one")
      ->check(CLI::ExistingFile);
  run_cmd->add_flag("--virtual-time", run.virtual_time, "Run the mock on a simulated clock (no real waiting)");
  run_cmd->add_flag("-q,--quiet", run.quiet, "Only report problems");

  GenerateOptions gen;
  auto* gen_cmd = app.add_subcommand("generate-profiles", "Draw a population and write it as a table");
  gen_cmd->add_option("--schema", gen.schema, "Profile schema, or a run configuration holding one")
      ->required()
      ->check(CLI::ExistingFile);
  gen_cmd->add_option("-n", gen.n, "Number of agents")->required();
  gen_cmd->add_option("--seed", gen.seed, "Run seed")->required();
  gen_cmd->add_option("--out", gen.out, "Output table")->required();

  ValidateOptions val;
  std::string val_survey;
  std::string val_population;
  auto* val_cmd = app.add_subcommand("validate", "Check a configuration and its inputs without running");
  val_cmd->add_option("--config", val.config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
  val_cmd->add_option("--survey", val_survey, "Questionnaire")->check(CLI::ExistingFile);
  val_cmd->add_option("--population", val_population, "Population table")->check(CLI::ExistingFile);

  ServeOptions serve;
  auto* serve_cmd = app.add_subcommand("serve", "Serve the multi-user HTTP API");
  serve_cmd->add_option("--data", serve.data, "Directory for the credential and simulation databases")->required();
  serve_cmd->add_option("--host", serve.host, "Bind address")->capture_default_str();
  serve_cmd->add_option("--port", serve.port, "Port, 0 for any free one")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : code(ExitStatus::invalid_input);
  }

  try {
    if (run_cmd->parsed()) {
      if (*seed_opt) run.seed = seed;
      if (!resume.empty()) run.resume = resume;
      if (!mock_script.empty()) run.mock_script = mock_script;
      if (!population.empty()) run.population = population;
      return code(cmd_run(run));
    }
    if (gen_cmd->parsed()) return code(cmd_generate_profiles(gen));
    if (val_cmd->parsed()) {
      if (!val_survey.empty()) val.survey = val_survey;
      if (!val_population.empty()) val.population = val_population;
      return code(cmd_validate(val));
    }
    if (serve_cmd->parsed()) return code(cmd_serve(serve));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return code(ExitStatus::internal_error);
  }
  return code(ExitStatus::internal_error);
}

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#include <algorithm>
#include <fstream>
#include <iostream>
#include <memory>
#include <thread>
#include <tuple>

#include <nlohmann/json.hpp>

#include "common.hpp"
#include "journal.hpp"
#include "signals.hpp"
#include "surveysim/clock.hpp"
#include "surveysim/export.hpp"
#include "surveysim/http_provider.hpp"
#include "surveysim/manifest.hpp"
#include "surveysim/metrics.hpp"
#include "surveysim/mock_provider.hpp"
#include "surveysim/profile.hpp"
#include "surveysim/prompt.hpp"
#include "surveysim/scheduler.hpp"
#include "surveysim/service.hpp"

namespace surveysim::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kResultsFile = "results.csv";
constexpr const char* kManifestFile = "manifest.json";
constexpr const char* kMetricsFile = "metrics.jsonl";
constexpr const char* kDirectiveFile = "prompt-directive-version";
constexpr const char* kJournalFile = "answers.jsonl";
constexpr const char* kPopulationFile = "population.csv";

// Writes next to the destination and renames, so readers never see a
// half-written file.
void write_atomically(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw Error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string export_csv(std::vector<AnswerRecord> records, const std::string& hash) {
  std::sort(records.begin(), records.end(), [](const AnswerRecord& a, const AnswerRecord& b) {
    return std::tie(a.agent_index, a.question_index) < std::tie(b.agent_index, b.question_index);
  });
  return export_results(records, ExportFormat::csv, hash);
}

struct Inputs {
  SimulationConfig config;
  std::shared_ptr<const SurveySpec> survey;
  MockScript script;
};

std::optional<Inputs> load_inputs(const RunOptions& o) {
  Inputs in;
  try {
    in.config = load_config(o.config, {o.seed, o.mock});
  } catch (const ValidationError& e) {
    std::cerr << "invalid configuration " << o.config.string() << ":\n";
    print_report(e.report());
    return std::nullopt;
  }
  try {
    in.survey = std::make_shared<const SurveySpec>(load_survey(o.survey));
  } catch (const ParseError& e) {
    print_parse_error("questionnaire " + o.survey.string(), e);
    return std::nullopt;
  }
  if (in.survey->questions.empty()) {
    std::cerr << "questionnaire " << o.survey.string() << " has no questions\n";
    return std::nullopt;
  }
  if (o.mock_script) {
    try {
      in.script = parse_mock_script(read_file(*o.mock_script));
    } catch (const ValidationError& e) {
      std::cerr << "invalid mock script " << o.mock_script->string() << ":\n";
      print_report(e.report());
      return std::nullopt;
    }
  }
  if (o.virtual_time && in.config.provider_id != "mock") {
    std::cerr << "--virtual-time needs the mock provider\n";
    return std::nullopt;
  }
  return in;
}

std::shared_ptr<const std::vector<AgentProfile>> load_population(const RunOptions& o, const SimulationConfig& config,
                                                                 const fs::path& saved) {
  std::vector<AgentProfile> agents;
  if (o.resume && fs::exists(saved)) {
    agents = population_from_csv(read_file(saved), config.profile_schema);
  } else if (o.population) {
    agents = population_from_csv(read_file(*o.population), config.profile_schema);
  } else {
    agents = generate_population(config.profile_schema, static_cast<std::size_t>(config.population_size),
                                 config.run_seed);
  }
  return std::make_shared<const std::vector<AgentProfile>>(std::move(agents));
}

}  // namespace

ExitStatus cmd_run(const RunOptions& o) {
  auto inputs = load_inputs(o);
  if (!inputs) return ExitStatus::invalid_input;
  const SimulationConfig& config = inputs->config;

  std::optional<RunManifest> resume_from;
  if (o.resume) {
    resume_from = load_manifest_file(*o.resume);
    if (!resume_from) {
      std::cerr << "no readable manifest at " << o.resume->string() << '\n';
      return ExitStatus::invalid_input;
    }
  }

  fs::create_directories(o.out);
  const fs::path journal_path = o.out / kJournalFile;
  if (!o.resume && fs::exists(journal_path) && fs::file_size(journal_path) > 0) {
    std::cerr << o.out.string() << " already holds answers from an earlier run; pass --resume "
              << (o.out / kManifestFile).string() << " to continue it\n";
    return ExitStatus::invalid_input;
  }

  std::shared_ptr<const std::vector<AgentProfile>> population;
  try {
    population = load_population(o, config, o.out / kPopulationFile);
  } catch (const ParseError& e) {
    print_parse_error("population table", e);
    return ExitStatus::invalid_input;
  } catch (const UnsatisfiableConstraints& e) {
    std::cerr << "cannot draw population: " << e.what() << '\n';
    return ExitStatus::invalid_input;
  }
  if (population->empty()) {
    std::cerr << "population is empty\n";
    return ExitStatus::invalid_input;
  }
  write_atomically(o.out / kPopulationFile, population_to_csv(*population, config.profile_schema));
  write_atomically(o.out / kDirectiveFile, std::string(kDirectiveVersion) + "\n");

  const std::string hash = config_hash(config);
  const std::string run_id = resume_from ? resume_from->run_id : "cli-" + hash.substr(0, 12);
  AnswerJournal journal(journal_path);
  ManifestFile manifest_file(o.out / kManifestFile);

  JobIdSet already;
  std::optional<JobStream> stream;
  if (resume_from) {
    already = journal.keys();
    already.insert(resume_from->completed.begin(), resume_from->completed.end());
    try {
      stream.emplace(make_resume_stream(*resume_from, config, population, inputs->survey, already));
    } catch (const ConfigMismatch& e) {
      std::cerr << "cannot resume: " << e.what() << '\n';
      return ExitStatus::invalid_input;
    }
  } else {
    stream.emplace(population, inputs->survey, static_cast<std::size_t>(config.buffer_size));
  }

  SystemClock system_clock;
  SimulatedClock simulated_clock;
  Clock& clock = o.virtual_time ? static_cast<Clock&>(simulated_clock) : system_clock;

  const auto total = static_cast<std::int64_t>(stream->total());
  auto recorder = std::make_shared<MetricsRecorder>(run_id, total, config.pricing, clock,
                                                    static_cast<std::int64_t>(already.size()));
  std::ofstream metrics_out(o.out / kMetricsFile, std::ios::app);
  std::thread metrics_thread([&metrics_out, sub = recorder->subscribe()] {
    while (auto snapshot = sub->next(std::chrono::seconds(1))) {
      metrics_out << nlohmann::json(*snapshot).dump() << '\n';
      metrics_out.flush();
    }
  });

  auto provider = default_provider_factory(config, inputs->script, clock);
  SchedulerContext ctx;
  ctx.run_id = run_id;
  ctx.config = config;
  ctx.provider = provider.get();
  if (config.provider_id != "mock") ctx.credentials = credentials_from_env(config.provider);
  ctx.clock = &clock;
  ctx.answers = &journal;
  ctx.checkpoints = &manifest_file;
  ctx.metrics = recorder;
  ctx.already_completed = already;

  RunManifest manifest;
  {
    Scheduler scheduler(std::move(ctx));
    SignalWatcher watcher([&scheduler](int) {
      std::cerr << "interrupted; waiting for in-flight requests\n";
      scheduler.cancel();
    });
    try {
      manifest = scheduler.run(*stream);
    } catch (...) {
      if (!recorder->finished()) recorder->finish();
      metrics_thread.join();
      throw;
    }
  }
  if (!recorder->finished()) recorder->finish();
  metrics_thread.join();

  manifest_file.write(manifest);
  write_atomically(o.out / kResultsFile, export_csv(journal.records(), hash));

  if (!o.quiet) {
    std::cout << to_string(manifest.status) << ": " << manifest.completed.size() << "/" << manifest.total_jobs
              << " answers written to " << (o.out / kResultsFile).string() << '\n';
  }
  if (manifest.status == RunStatus::completed) return ExitStatus::ok;

  if (!manifest.failure.empty()) std::cerr << "run stopped: " << manifest.failure << '\n';
  if (!manifest.uncompleted.empty()) {
    std::cerr << manifest.uncompleted.size() << " job(s) did not complete\n";
  }
  std::cout << "manifest: " << manifest_file.path().string() << '\n';
  return ExitStatus::partial;
}

}  // namespace surveysim::cli

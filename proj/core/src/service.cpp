// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#include "surveysim/service.hpp"

#include <set>
#include <sstream>
#include <stdexcept>

#include "surveysim/csv.hpp"
#include "surveysim/digest.hpp"
#include "surveysim/errors.hpp"
#include "surveysim/http_provider.hpp"

namespace surveysim {

namespace {

constexpr std::string_view kGenerated = "generated";
constexpr std::string_view kUploaded = "uploaded";

ValidationError validation_failure(const std::string& subject, const std::string& message) {
  ValidationReport r;
  r.add(subject, message);
  return ValidationError(r);
}

std::string population_id_for(const std::string& run_id) { return "pop-" + run_id; }

// Run configs are stored as JSON and reloaded on resume; normalising through
// the same round trip up front keeps the config hash stable across the two.
SimulationConfig canonical(const SimulationConfig& config) {
  nlohmann::json j = config;
  return j.get<SimulationConfig>();
}

}  // namespace

std::string_view to_string(RunState state) {
  switch (state) {
    case RunState::draft: return "draft";
    case RunState::running: return "running";
    case RunState::cancelling: return "cancelling";
    case RunState::completed: return "completed";
    case RunState::failed: return "failed";
    case RunState::cancelled: return "cancelled";
  }
  return "draft";
}

RunState parse_run_state(std::string_view s) {
  for (auto st : {RunState::draft, RunState::running, RunState::cancelling, RunState::completed, RunState::failed,
                  RunState::cancelled}) {
    if (to_string(st) == s) return st;
  }
  throw std::invalid_argument("unknown run state: " + std::string(s));
}

bool transition_allowed(RunState from, RunState to) {
  switch (from) {
    case RunState::draft: return to == RunState::running;
    case RunState::running:
      return to == RunState::completed || to == RunState::failed || to == RunState::cancelling;
    case RunState::cancelling: return to == RunState::cancelled;
    case RunState::failed:
    case RunState::cancelled: return to == RunState::running;
    case RunState::completed: return false;
  }
  return false;
}

std::unique_ptr<Provider> default_provider_factory(const SimulationConfig& config, const MockScript& script,
                                                   Clock& clock) {
  if (config.provider_id == "mock") return make_mock(script, config.run_seed, &clock);
  return make_provider(config);
}

RunService::RunService(ServiceOptions options) : options_(std::move(options)) {
  if (options_.store == nullptr) throw std::invalid_argument("run service needs a store");
  clock_ = options_.clock ? options_.clock : &system_clock_;
  if (!options_.provider_factory) options_.provider_factory = default_provider_factory;

  // Runs that were live when a previous process stopped cannot still be
  // running; their checkpoints make them resumable.
  std::lock_guard lock(mutex_);
  for (const auto& row : options_.store->runs_in_state("running")) {
    transition_locked(row.run_id, RunState::running, RunState::failed, "interrupted by service restart");
  }
  for (const auto& row : options_.store->runs_in_state("cancelling")) {
    transition_locked(row.run_id, RunState::cancelling, RunState::cancelled);
  }
}

RunService::~RunService() {
  std::unique_lock lock(mutex_);
  for (auto& [id, run] : active_) {
    if (!run.finished && run.scheduler) run.scheduler->cancel();
  }
  std::vector<std::thread> threads;
  for (auto& [id, run] : active_) {
    if (run.thread.joinable()) threads.push_back(std::move(run.thread));
  }
  lock.unlock();
  for (auto& t : threads) t.join();
}

void RunService::transition_locked(const std::string& run_id, RunState from, RunState to,
                                   const std::string& failure) {
  if (!transition_allowed(from, to)) {
    throw std::logic_error("undeclared run transition " + std::string(to_string(from)) + " -> " +
                           std::string(to_string(to)));
  }
  options_.store->update_run_state(run_id, std::string(to_string(to)), failure);
  log_.push_back({run_id, from, to});
}

UserId RunService::register_user(const std::string& login, const std::string& secret) {
  return options_.store->create_user(login, secret);
}

std::string RunService::login(const std::string& login, const std::string& secret) {
  return options_.store->authenticate(login, secret);
}

UserId RunService::user_for_token(const std::string& token) { return options_.store->user_for_token(token); }

std::string RunService::upload(UserId user, const std::string& format, const std::string& filename,
                               const std::string& content) {
  if (format == "population-csv") {
    std::vector<csv::Row> rows;
    try {
      rows = csv::parse(content);
    } catch (const ParseError& e) {
      throw validation_failure("file", e.what());
    }
    if (rows.empty() || rows.front().empty() || rows.front().front() != "agent_id") {
      throw validation_failure("file", "population table must start with an agent_id column");
    }
  } else {
    SurveyFormat f{};
    try {
      f = parse_survey_format(format);
    } catch (const Error& e) {
      throw validation_failure("format", e.what());
    }
    try {
      (void)parse_survey_document(content, f);
    } catch (const ParseError& e) {
      throw validation_failure("file", e.what());
    } catch (const ValidationError&) {
      throw;
    }
  }
  return options_.store->save_upload(user, format, filename, content);
}

RunService::Launch RunService::load_launch(const RunRow& row) const {
  Launch l;
  l.run_id = row.run_id;
  l.owner = row.owner;
  l.config = nlohmann::json::parse(row.config_json).get<SimulationConfig>();
  l.survey = std::make_shared<const SurveySpec>(parse_survey_document(row.survey_json, SurveyFormat::structured_text));
  if (row.population_ref == kUploaded) {
    auto csv_text = options_.store->load_population(row.owner, population_id_for(row.run_id));
    if (!csv_text) throw NotFound("population for run " + row.run_id + " is missing");
    l.population = std::make_shared<const std::vector<AgentProfile>>(
        population_from_csv(*csv_text, l.config.profile_schema));
  } else {
    l.population = std::make_shared<const std::vector<AgentProfile>>(generate_population(
        l.config.profile_schema, static_cast<std::size_t>(l.config.population_size), l.config.run_seed));
  }
  if (!row.mock_script_json.empty()) l.script = parse_mock_script(row.mock_script_json);
  return l;
}

RunHandle RunService::start_run(UserId user, const StartRequest& request) {
  ValidationReport report = validate_config(request.config);
  MockScript script;
  if (!request.mock_script_json.empty()) {
    try {
      script = parse_mock_script(request.mock_script_json);
      report.merge(script.validate(), "mock_script");
    } catch (const std::exception& e) {
      report.add("mock_script", e.what());
    }
  }
  if (request.survey_upload_id.empty()) report.add("survey_upload_id", "is required");
  if (!report.ok()) throw ValidationError(report);

  if (!request.run_key.empty()) {
    if (auto existing = options_.store->find_run_by_key(user, request.run_key)) return get_run(user, existing->run_id);
  }

  const SimulationConfig config = canonical(request.config);
  const UploadRow survey_upload = options_.store->get_upload(user, request.survey_upload_id);
  if (survey_upload.format == "population-csv") throw validation_failure("survey_upload_id", "is not a questionnaire");
  auto survey = std::make_shared<const SurveySpec>(
      parse_survey_document(survey_upload.content, parse_survey_format(survey_upload.format)));

  std::shared_ptr<const std::vector<AgentProfile>> population;
  std::string population_csv;
  std::string_view population_ref = kGenerated;
  try {
    if (!request.population_upload_id.empty()) {
      const UploadRow pop = options_.store->get_upload(user, request.population_upload_id);
      if (pop.format != "population-csv") throw validation_failure("population_upload_id", "is not a population table");
      population = std::make_shared<const std::vector<AgentProfile>>(population_from_csv(pop.content, config.profile_schema));
      population_csv = pop.content;
      population_ref = kUploaded;
    } else {
      population = std::make_shared<const std::vector<AgentProfile>>(generate_population(
          config.profile_schema, static_cast<std::size_t>(config.population_size), config.run_seed));
      population_csv = population_to_csv(*population, config.profile_schema);
    }
  } catch (const ParseError& e) {
    throw validation_failure("population_upload_id", e.what());
  } catch (const UnsatisfiableConstraints& e) {
    throw validation_failure("profile_schema", e.what());
  }
  if (population->empty() || survey->questions.empty()) {
    throw validation_failure("run", "population and questionnaire must both be non-empty");
  }

  RunRow row;
  row.run_id = "run-" + random_hex(8);
  row.owner = user;
  row.state = std::string(to_string(RunState::draft));
  row.run_key = request.run_key;
  row.config_json = nlohmann::json(config).dump();
  row.survey_json = serialize_survey(*survey, SurveyFormat::structured_text);
  row.population_ref = std::string(population_ref);
  row.mock_script_json = request.mock_script_json;
  row.created_at_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::system_clock::now().time_since_epoch())
                          .count();
  try {
    options_.store->create_run(row);
  } catch (const StateConflict&) {
    // A concurrent start with the same key won the race.
    if (auto existing = options_.store->find_run_by_key(user, request.run_key)) return get_run(user, existing->run_id);
    throw;
  }
  options_.store->save_population(user, population_id_for(row.run_id), row.run_id, population_csv);

  std::lock_guard lock(mutex_);
  transition_locked(row.run_id, RunState::draft, RunState::running);
  launch_locked({row.run_id, user, config, survey, population, script, std::nullopt});
  return {row.run_id, user, RunState::running, row.created_at_ms, {}};
}

void RunService::launch_locked(Launch launch) {
  reap_locked(launch.run_id);
  ActiveRun& run = active_[launch.run_id];
  run.owner = launch.owner;
  run.thread = std::thread([this, l = std::move(launch)]() mutable { execute(std::move(l)); });
}

void RunService::reap_locked(const std::string& run_id) {
  auto it = active_.find(run_id);
  if (it == active_.end()) return;
  if (it->second.thread.joinable()) it->second.thread.join();
  active_.erase(it);
}

void RunService::execute(Launch launch) {
  const std::string& run_id = launch.run_id;
  Store& store = *options_.store;
  const std::size_t total = launch.population->size() * launch.survey->size();

  std::optional<RunManifest> manifest;
  std::string failure;
  std::shared_ptr<MetricsRecorder> recorder;
  try {
    JobIdSet already;
    std::optional<JobStream> stream;
    if (launch.resume_from) {
      already = store.answer_keys(launch.owner, run_id);
      already.insert(launch.resume_from->completed.begin(), launch.resume_from->completed.end());
      stream.emplace(make_resume_stream(*launch.resume_from, launch.config, launch.population, launch.survey, already));
    } else {
      stream.emplace(launch.population, launch.survey, static_cast<std::size_t>(launch.config.buffer_size));
    }
    recorder = std::make_shared<MetricsRecorder>(run_id, static_cast<std::int64_t>(total), launch.config.pricing,
                                                 *clock_, static_cast<std::int64_t>(already.size()));
    registry_.put(run_id, recorder);

    auto provider = options_.provider_factory(launch.config, launch.script, *clock_);
    StoreAnswerSink answers(store, launch.owner);
    StoreCheckpointSink checkpoints(store, launch.owner);

    SchedulerContext ctx;
    ctx.run_id = run_id;
    ctx.config = launch.config;
    ctx.provider = provider.get();
    if (launch.config.provider_id != "mock") ctx.credentials = credentials_from_env(launch.config.provider);
    ctx.clock = clock_;
    ctx.answers = &answers;
    ctx.checkpoints = &checkpoints;
    ctx.metrics = recorder;
    ctx.already_completed = std::move(already);
    auto scheduler = std::make_shared<Scheduler>(std::move(ctx));
    {
      std::lock_guard lock(mutex_);
      auto& run = active_[run_id];
      run.scheduler = scheduler;
      if (run.cancel_requested) scheduler->cancel();
    }
    manifest = scheduler->run(*stream);
  } catch (const std::exception& e) {
    failure = e.what();
  }
  if (recorder && !recorder->finished()) recorder->finish();

  std::lock_guard lock(mutex_);
  auto& run = active_[run_id];
  try {
    const RunState current = parse_run_state(store.get_run(launch.owner, run_id).state);
    if (current == RunState::cancelling) {
      transition_locked(run_id, RunState::cancelling, RunState::cancelled);
    } else if (manifest && manifest->status == RunStatus::completed) {
      transition_locked(run_id, RunState::running, RunState::completed);
    } else {
      if (failure.empty() && manifest) {
        failure = !manifest->failure.empty()           ? manifest->failure
                  : manifest->status == RunStatus::cancelled ? "service shutting down"
                                                       : std::to_string(manifest->uncompleted.size()) +
                                                             " jobs did not complete";
      }
      transition_locked(run_id, RunState::running, RunState::failed, failure);
    }
  } catch (const std::exception&) {
    // The run's rows were purged while it wound down; nothing left to update.
  }
  run.finished = true;
  finished_cv_.notify_all();
}

void RunService::cancel_run(UserId user, const std::string& run_id) {
  std::lock_guard lock(mutex_);
  const RunRow row = options_.store->get_run(user, run_id);
  const RunState state = parse_run_state(row.state);
  if (state != RunState::running) {
    throw StateConflict("run is " + row.state + "; only running runs can be cancelled");
  }
  transition_locked(run_id, RunState::running, RunState::cancelling);
  auto& run = active_[run_id];
  run.cancel_requested = true;
  if (run.scheduler) run.scheduler->cancel();
}

RunHandle RunService::resume_run(UserId user, const std::string& run_id) {
  std::lock_guard lock(mutex_);
  const RunRow row = options_.store->get_run(user, run_id);
  const RunState state = parse_run_state(row.state);
  if (state != RunState::failed && state != RunState::cancelled) {
    throw StateConflict("run is " + row.state + "; only failed or cancelled runs can be resumed");
  }
  auto manifest = options_.store->load_manifest(user, run_id);
  if (!manifest) throw StateConflict("run has no manifest to resume from");
  Launch launch = load_launch(row);
  launch.resume_from = std::move(manifest);
  if (launch.resume_from->config_hash != config_hash(launch.config)) {
    throw StateConflict("run configuration no longer matches its manifest");
  }
  transition_locked(run_id, state, RunState::running);
  launch_locked(std::move(launch));
  return {row.run_id, row.owner, RunState::running, row.created_at_ms, {}};
}

RunHandle RunService::get_run(UserId user, const std::string& run_id) const {
  const RunRow row = options_.store->get_run(user, run_id);
  return {row.run_id, row.owner, parse_run_state(row.state), row.created_at_ms, row.failure};
}

std::shared_ptr<MetricsRecorder> RunService::metrics(UserId user, const std::string& run_id) {
  const RunRow row = options_.store->get_run(user, run_id);
  if (auto live = registry_.find(run_id)) return live;

  // Rebuild a finished view for runs from an earlier process.
  const auto config = nlohmann::json::parse(row.config_json).get<SimulationConfig>();
  const auto manifest = options_.store->load_manifest(user, run_id);
  const std::int64_t completed = options_.store->answer_count(user, run_id);
  const std::int64_t total = manifest ? static_cast<std::int64_t>(manifest->total_jobs) : completed;
  auto recorder = std::make_shared<MetricsRecorder>(run_id, total, config.pricing, *clock_, completed);
  if (manifest) {
    for (const auto& u : manifest->uncompleted) {
      if (u.attempts > 0) recorder->on_exhausted(false);
    }
  }
  recorder->finish();
  return recorder;
}

std::string RunService::download(UserId user, const std::string& run_id, const std::string& format) const {
  const RunRow row = options_.store->get_run(user, run_id);
  if (format == "manifest") {
    auto text = options_.store->manifest_text(user, run_id);
    if (!text) throw NotFound("run " + run_id + " has no manifest yet");
    return *text;
  }
  ExportFormat f{};
  try {
    f = parse_export_format(format);
  } catch (const std::invalid_argument& e) {
    throw validation_failure("format", e.what());
  }
  const auto config = nlohmann::json::parse(row.config_json).get<SimulationConfig>();
  std::ostringstream out;
  ResultsWriter writer(out, f, config_hash(config));
  options_.store->for_each_result(user, run_id, [&](const AnswerRecord& r) { writer.write(r); });
  writer.finish();
  return out.str();
}

PurgeReport RunService::delete_user_data(UserId user) {
  std::vector<std::string> owned;
  {
    std::lock_guard lock(mutex_);
    for (auto& [id, run] : active_) {
      if (run.owner != user) continue;
      owned.push_back(id);
      if (run.finished) continue;
      const RunState state = parse_run_state(options_.store->get_run(user, id).state);
      if (state == RunState::running) transition_locked(id, RunState::running, RunState::cancelling);
      run.cancel_requested = true;
      if (run.scheduler) run.scheduler->cancel();
    }
  }
  for (const auto& id : owned) wait(id);

  std::lock_guard lock(mutex_);
  for (const auto& id : owned) {
    reap_locked(id);
    registry_.erase(id);
  }
  return options_.store->delete_user_data(user);
}

void RunService::wait(const std::string& run_id) {
  std::unique_lock lock(mutex_);
  finished_cv_.wait(lock, [&] {
    auto it = active_.find(run_id);
    return it == active_.end() || it->second.finished;
  });
}

void RunService::wait_all() {
  std::unique_lock lock(mutex_);
  finished_cv_.wait(lock, [&] {
    for (const auto& [id, run] : active_) {
      if (!run.finished) return false;
    }
    return true;
  });
}

std::vector<RunTransition> RunService::transitions() const {
  std::lock_guard lock(mutex_);
  return log_;
}

}  // namespace surveysim

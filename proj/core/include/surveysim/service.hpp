// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#pragma once

#include <chrono>
#include <condition_variable>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "surveysim/clock.hpp"
#include "surveysim/config.hpp"
#include "surveysim/export.hpp"
#include "surveysim/metrics.hpp"
#include "surveysim/mock_provider.hpp"
#include "surveysim/scheduler.hpp"
#include "surveysim/store.hpp"
#include "surveysim/survey.hpp"

namespace surveysim {

enum class RunState { draft, running, cancelling, completed, failed, cancelled };

[[nodiscard]] std::string_view to_string(RunState state);
[[nodiscard]] RunState parse_run_state(std::string_view s);

/// The declared lifecycle: draft->running->{completed, failed, cancelling},
/// cancelling->cancelled, and {failed, cancelled}->running on resume.
[[nodiscard]] bool transition_allowed(RunState from, RunState to);

struct RunTransition {
  std::string run_id;
  RunState from;
  RunState to;
};

struct RunHandle {
  std::string run_id;
  UserId owner = 0;
  RunState state = RunState::draft;
  std::int64_t created_at_ms = 0;
  std::string failure;
};

struct StartRequest {
  SimulationConfig config;
  /// Upload holding the questionnaire.
  std::string survey_upload_id;
  /// Optional upload holding a population table; otherwise the population is
  /// generated from the config's schema, size and seed.
  std::string population_upload_id;
  /// Mock script as JSON text; only honoured with the mock provider.
  std::string mock_script_json;
  /// Repeated starts with the same key return the first run.
  std::string run_key;
};

using ProviderFactory =
    std::function<std::unique_ptr<Provider>(const SimulationConfig&, const MockScript&, Clock&)>;

/// Builds a MockProvider for provider_id "mock" and the HTTP adapter
/// otherwise.
[[nodiscard]] std::unique_ptr<Provider> default_provider_factory(const SimulationConfig& config,
                                                                 const MockScript& script, Clock& clock);

struct ServiceOptions {
  Store* store = nullptr;
  /// Time source for schedulers; null means the system clock.
  Clock* clock = nullptr;
  ProviderFactory provider_factory;
  std::chrono::milliseconds metrics_interval = std::chrono::milliseconds(250);
};

/// Run lifecycle management on top of the store. Each run executes on its own
/// background thread; every state change passes through one function that
/// checks it against the declared lifecycle and records it.
class RunService {
 public:
  explicit RunService(ServiceOptions options);
  ~RunService();
  RunService(const RunService&) = delete;
  RunService& operator=(const RunService&) = delete;

  UserId register_user(const std::string& login, const std::string& secret);
  std::string login(const std::string& login, const std::string& secret);
  [[nodiscard]] UserId user_for_token(const std::string& token);

  /// `format` is "csv" or "json" for questionnaires, "population-csv" for a
  /// population table. Content is validated before it is stored.
  std::string upload(UserId user, const std::string& format, const std::string& filename,
                     const std::string& content);

  RunHandle start_run(UserId user, const StartRequest& request);
  void cancel_run(UserId user, const std::string& run_id);
  RunHandle resume_run(UserId user, const std::string& run_id);
  [[nodiscard]] RunHandle get_run(UserId user, const std::string& run_id) const;

  /// Live recorder for an active or recently finished run; for older runs a
  /// finished recorder rebuilt from the store.
  [[nodiscard]] std::shared_ptr<MetricsRecorder> metrics(UserId user, const std::string& run_id);

  /// "csv", "jsonl" or "manifest". Always read from the store.
  [[nodiscard]] std::string download(UserId user, const std::string& run_id, const std::string& format) const;

  PurgeReport delete_user_data(UserId user);

  /// Blocks until the run's background thread has finished.
  void wait(const std::string& run_id);
  void wait_all();

  [[nodiscard]] std::vector<RunTransition> transitions() const;
  [[nodiscard]] std::chrono::milliseconds metrics_interval() const { return options_.metrics_interval; }
  [[nodiscard]] Store& store() { return *options_.store; }

 private:
  struct ActiveRun {
    UserId owner = 0;
    std::thread thread;
    std::shared_ptr<Scheduler> scheduler;
    bool cancel_requested = false;
    bool finished = false;
  };

  struct Launch {
    std::string run_id;
    UserId owner = 0;
    SimulationConfig config;
    std::shared_ptr<const SurveySpec> survey;
    std::shared_ptr<const std::vector<AgentProfile>> population;
    MockScript script;
    std::optional<RunManifest> resume_from;
  };

  void transition_locked(const std::string& run_id, RunState from, RunState to, const std::string& failure = {});
  void launch_locked(Launch launch);
  void execute(Launch launch);
  void reap_locked(const std::string& run_id);
  Launch load_launch(const RunRow& row) const;

  ServiceOptions options_;
  SystemClock system_clock_;
  Clock* clock_;
  MetricsRegistry registry_;

  mutable std::mutex mutex_;
  std::condition_variable finished_cv_;
  std::map<std::string, ActiveRun> active_;
  std::vector<RunTransition> log_;
};

}  // namespace surveysim

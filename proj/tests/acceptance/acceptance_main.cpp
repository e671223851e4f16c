// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
//
// Desk-scale acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <unistd.h>
#include <vector>

#include "fixtures.hpp"
#include "surveysim/errors.hpp"
#include "surveysim/export.hpp"
#include "surveysim/mock_provider.hpp"
#include "surveysim/scheduler.hpp"
#include "surveysim/service.hpp"
#include "surveysim/store.hpp"

using namespace surveysim;
using namespace std::chrono_literals;
namespace fx = surveysim::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects failure reasons; the first few are reported.
class Check {
 public:
  void expect(bool condition, const std::string& what) {
    if (condition) return;
    ++failures_;
    if (reasons_.size() < 3) reasons_.push_back(what);
  }
  void note(const std::string& s) { notes_.push_back(s); }
  [[nodiscard]] Outcome outcome() const {
    Outcome o;
    o.pass = failures_ == 0;
    std::ostringstream out;
    for (std::size_t i = 0; i < notes_.size(); ++i) out << (i ? ", " : "") << notes_[i];
    if (failures_ != 0) {
      out << (notes_.empty() ? "" : "; ") << failures_ << " failed check(s): ";
      for (std::size_t i = 0; i < reasons_.size(); ++i) out << (i ? " | " : "") << reasons_[i];
    }
    o.detail = out.str();
    return o;
  }

 private:
  int failures_ = 0;
  std::vector<std::string> reasons_;
  std::vector<std::string> notes_;
};

double seconds(Duration d) { return std::chrono::duration<double>(d).count(); }

StoreOptions memory_store() {
  StoreOptions o;
  o.hash_cost = HashCost::minimum;
  return o;
}

// Runs one scheduler pass over in-memory sinks with the mock provider.
struct Rig {
  SimulationConfig config;
  fx::Inputs in;
  SimulatedClock clock;
  MockScript script;
  MemoryAnswerSink answers;
  MemoryCheckpointSink checkpoints;
  SchedulerHooks hooks;
  SchedulerStats stats;
  std::vector<std::tuple<TimePoint, JobId, std::int64_t>> dispatches;
  AnswerSink* sink = &answers;
  CheckpointSink* checkpoint_sink = &checkpoints;

  Rig(std::int64_t agents, std::size_t questions, std::uint64_t seed = 7) : config(fx::demo_config(agents, seed)) {
    in = fx::demo_inputs(config, questions);
  }

  [[nodiscard]] std::size_t total() const { return in.population->size() * in.survey->size(); }

  RunManifest run(const JobIdSet& already = {}, const std::optional<RunManifest>& resume = std::nullopt) {
    auto mock = make_mock(script, config.run_seed, &clock);
    SchedulerContext ctx;
    ctx.run_id = "acceptance";
    ctx.config = config;
    ctx.provider = mock.get();
    ctx.clock = &clock;
    ctx.answers = sink;
    ctx.checkpoints = checkpoint_sink;
    ctx.metrics = std::make_shared<MetricsRecorder>("acceptance", static_cast<std::int64_t>(total()), Pricing{}, clock,
                                                    static_cast<std::int64_t>(already.size()));
    ctx.already_completed = already;
    ctx.hooks = hooks;
    auto user_dispatch = hooks.on_dispatch;
    ctx.hooks.on_dispatch = [this, user_dispatch](TimePoint t, const JobId& id, std::int64_t tokens) {
      dispatches.emplace_back(t, id, tokens);
      if (user_dispatch) user_dispatch(t, id, tokens);
    };
    Scheduler scheduler(ctx);
    JobStream stream = resume ? make_resume_stream(*resume, config, in.population, in.survey, already)
                              : JobStream(in.population, in.survey, static_cast<std::size_t>(config.buffer_size));
    RunManifest m = scheduler.run(stream);
    stats = scheduler.stats();
    return m;
  }

  [[nodiscard]] std::vector<TimePoint> times_for(const JobId& id) const {
    std::vector<TimePoint> out;
    for (const auto& [t, j, tokens] : dispatches) {
      if (j == id) out.push_back(t);
    }
    return out;
  }
};

const SurveyQuestion* find_question(const SurveySpec& survey, const std::string& id) {
  for (const auto& q : survey.questions) {
    if (q.question_id == id) return &q;
  }
  return nullptr;
}

// An answer record is schema-valid when its stored value reads back to a
// value the question accepts and its raw reply parses to that same value.
bool record_valid(const AnswerRecord& r, const SurveySpec& survey) {
  const SurveyQuestion* q = find_question(survey, r.job.question_id);
  if (q == nullptr || r.status != "ok") return false;
  auto value = parse_answer_value(r.value, q->answer_schema);
  if (!value || !answer_satisfies(*value, q->answer_schema)) return false;
  const auto reparsed = parse_response(r.raw, q->answer_schema);
  const auto* parsed = std::get_if<ParsedAnswer>(&reparsed);
  return parsed != nullptr && parsed->value == *value;
}

// ---------------------------------------------------------------------------

Outcome end_to_end() {
  Check c;
  const auto wall_start = std::chrono::steady_clock::now();
  SimulatedClock clock;
  Store store(memory_store());
  ServiceOptions options;
  options.store = &store;
  options.clock = &clock;
  RunService service(options);
  const UserId user = service.register_user("desk", "pw");
  const auto survey = fx::demo_survey(10);
  StartRequest req;
  req.config = fx::demo_config(50, 2024);
  req.config.rpm_limit = 120;
  // With failure_rate 0.1 and the default budget of 3 retries, the chance
  // that at least one of 500 jobs fails four times in a row is about 5%.
  // A budget of 6 brings that below 1e-4 without changing the workload.
  req.config.retry.max_retries = 6;
  req.survey_upload_id = service.upload(user, "json", "survey.json", serialize_survey(survey, SurveyFormat::structured_text));
  req.mock_script_json = R"({"failure_rate": 0.1})";
  const TimePoint sim_start = clock.now();
  const RunHandle run = service.start_run(user, req);
  service.wait(run.run_id);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();

  const auto records = store.stream_results(user, run.run_id);
  std::set<JobId> keys;
  std::size_t valid = 0;
  for (const auto& r : records) {
    keys.insert(r.job);
    if (record_valid(r, survey)) ++valid;
  }
  const auto manifest = store.load_manifest(user, run.run_id);
  const auto state = service.get_run(user, run.run_id).state;
  c.expect(state == RunState::completed, "run state " + std::string(to_string(state)));
  c.expect(records.size() == 500, std::to_string(records.size()) + " records");
  c.expect(keys.size() == records.size(), "duplicate keys");
  c.expect(valid == records.size(), std::to_string(records.size() - valid) + " invalid records");
  c.expect(manifest && manifest->uncompleted.empty(), "manifest has uncompleted jobs");
  c.expect(wall < 60.0, "wall clock " + std::to_string(wall) + "s");
  c.note(std::to_string(records.size()) + " records");
  c.note(std::to_string(valid) + " schema-valid");
  c.note("uncompleted " + std::to_string(manifest ? manifest->uncompleted.size() : 999));
  c.note("max_retries " + std::to_string(req.config.retry.max_retries));
  std::ostringstream t;
  t.precision(3);
  t << "wall " << wall << "s, simulated " << seconds(clock.now() - sim_start) << "s";
  c.note(t.str());
  return c.outcome();
}

Outcome scale_memory() {
  Check c;
  Rig rig(1000, 5);
  rig.config.buffer_size = 256;
  rig.config.max_concurrency = 8;
  rig.config.rpm_limit = 100000;
  rig.config.tpm_limit = 100'000'000;
  const auto m = rig.run();
  const std::size_t bound = 256 + static_cast<std::size_t>(rig.config.max_concurrency);
  c.expect(m.status == RunStatus::completed, "status " + std::string(to_string(m.status)));
  c.expect(rig.answers.size() == 5000, std::to_string(rig.answers.size()) + " answers");
  c.expect(rig.stats.peak_materialized <= bound,
           "peak materialized " + std::to_string(rig.stats.peak_materialized) + " > " + std::to_string(bound));
  c.note("5000 jobs");
  c.note("peak materialized " + std::to_string(rig.stats.peak_materialized) + " <= " + std::to_string(bound));
  return c.outcome();
}

Outcome rate_safety() {
  Check c;
  std::mt19937_64 rng(4242);
  auto pick = [&](std::int64_t lo, std::int64_t hi) { return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng); };
  std::size_t total_dispatches = 0;
  std::int64_t worst_rpm_headroom = 1 << 30;
  std::int64_t worst_tpm_headroom = 1 << 30;
  for (int trial = 0; trial < 100; ++trial) {
    Rig rig(pick(1, 20), static_cast<std::size_t>(pick(1, 6)), rng());
    rig.config.max_concurrency = pick(1, 8);
    rig.config.rpm_limit = pick(3, 60);
    rig.config.tpm_limit = pick(400, 20000);
    rig.config.retry.max_retries = pick(0, 4);
    rig.script.failure_rate = std::uniform_real_distribution<double>(0, 0.4)(rng);
    rig.script.malformed_rate = std::uniform_real_distribution<double>(0, 0.3)(rng);
    rig.script.latency_max = std::chrono::milliseconds(pick(0, 5000));
    (void)rig.run();
    total_dispatches += rig.dispatches.size();
    // Replay every trailing window (t - 60s, t] ending at a dispatch.
    for (std::size_t i = 0; i < rig.dispatches.size(); ++i) {
      const TimePoint end = std::get<0>(rig.dispatches[i]);
      std::int64_t requests = 0;
      std::int64_t tokens = 0;
      for (const auto& [t, job, est] : rig.dispatches) {
        if (t > end - 60s && t <= end) {
          ++requests;
          tokens += est;
        }
      }
      worst_rpm_headroom = std::min(worst_rpm_headroom, rig.config.rpm_limit - requests);
      worst_tpm_headroom = std::min(worst_tpm_headroom, rig.config.tpm_limit - tokens);
      c.expect(requests <= rig.config.rpm_limit, "trial " + std::to_string(trial) + " rpm window " + std::to_string(requests));
      c.expect(tokens <= rig.config.tpm_limit, "trial " + std::to_string(trial) + " tpm window " + std::to_string(tokens));
    }
  }
  c.note("100 trials, " + std::to_string(total_dispatches) + " dispatches");
  c.note("min rpm headroom " + std::to_string(worst_rpm_headroom));
  c.note("min tpm headroom " + std::to_string(worst_tpm_headroom));

  // Throughput: zero latency, N jobs at R requests per minute.
  int throughput_cases = 0;
  for (const auto& [agents, questions, rpm] :
       std::vector<std::tuple<std::int64_t, std::size_t, std::int64_t>>{
           {1, 1, 1}, {7, 1, 3}, {12, 5, 60}, {61, 1, 60}, {25, 10, 120}, {50, 5, 7}}) {
    Rig rig(agents, questions);
    rig.config.rpm_limit = rpm;
    rig.config.max_concurrency = 16;
    const TimePoint start = rig.clock.now();
    const auto m = rig.run();
    const auto n = static_cast<std::int64_t>(rig.total());
    const auto minutes = (n + rpm - 1) / rpm;
    const Duration elapsed = rig.clock.now() - start;
    c.expect(m.status == RunStatus::completed, "throughput run did not complete");
    c.expect(elapsed <= std::chrono::minutes(minutes),
             "N=" + std::to_string(n) + " R=" + std::to_string(rpm) + " took " + std::to_string(seconds(elapsed)) + "s");
    ++throughput_cases;
  }
  c.note(std::to_string(throughput_cases) + " throughput cases within ceil(N/R) minutes");
  return c.outcome();
}

Outcome crash_sweep() {
  Check c;
  // Count the steps of an uninterrupted run first.
  int total_steps = 0;
  {
    Rig rig(5, 4);
    rig.hooks.on_step = [&](SchedulerStep, const JobId&) { ++total_steps; };
    (void)rig.run();
  }
  int resumed_ok = 0;
  for (int crash_at = 1; crash_at <= total_steps; ++crash_at) {
    Store store(memory_store());
    const UserId user = store.create_user("crash", "pw");
    RunRow row;
    row.run_id = "acceptance";
    row.owner = user;
    row.state = "running";
    row.config_json = "{}";
    row.survey_json = "{}";
    store.create_run(row);
    StoreAnswerSink answers(store, user);
    StoreCheckpointSink checkpoints(store, user);

    Rig rig(5, 4);
    rig.sink = &answers;
    rig.checkpoint_sink = &checkpoints;
    int steps = 0;
    rig.hooks.on_step = [&](SchedulerStep, const JobId&) {
      if (++steps == crash_at) throw std::runtime_error("injected crash");
    };
    bool crashed = false;
    try {
      (void)rig.run();
    } catch (const std::runtime_error&) {
      crashed = true;
    }
    c.expect(crashed, "no crash at step " + std::to_string(crash_at));
    rig.hooks.on_step = nullptr;

    // Restart: whatever the store holds is all that survived.
    RunManifest from;
    if (auto m = store.load_manifest(user, "acceptance")) {
      from = *m;
    } else {
      from.run_id = "acceptance";
      from.config_hash = config_hash(rig.config);
      from.directive_version = std::string(kDirectiveVersion);
      from.total_jobs = rig.total();
    }
    const JobIdSet saved = store.answer_keys(user, "acceptance");
    JobIdSet already = from.completed;
    already.insert(saved.begin(), saved.end());
    const auto m = rig.run(already, from);
    const auto stored = store.stream_results(user, "acceptance");
    std::set<JobId> unique;
    for (const auto& r : stored) unique.insert(r.job);
    const bool ok = m.status == RunStatus::completed && stored.size() == 20 && unique.size() == 20;
    c.expect(ok, "crash at step " + std::to_string(crash_at) + ": " + std::to_string(stored.size()) + " stored, " +
                     std::to_string(unique.size()) + " unique");
    if (ok) ++resumed_ok;
  }
  c.note(std::to_string(resumed_ok) + "/" + std::to_string(total_steps) + " crash points resume to 20 unique answers");
  return c.outcome();
}

Outcome retry_backoff() {
  Check c;
  const std::string ok_reply = "```answer\nanswer: 4\nreasoning: fine.\n```";

  // Rate limit with retry_after = 5s, longer than the 1s first backoff.
  {
    Rig rig(2, 1);
    rig.config.retry.jitter_fraction = 0.0;
    rig.script.responses[{"a0", "q0"}] = {ProviderError::rate_limit(5s), ok_reply};
    (void)rig.run();
    const auto t = rig.times_for({"a0", "q0"});
    c.expect(t.size() == 2 && t[1] - t[0] == Duration(5s),
             "rate-limit retry gap " + (t.size() == 2 ? std::to_string(seconds(t[1] - t[0])) : std::string("n/a")));
    c.note("retry_after 5s honoured");
  }
  // Persistent transient failure: exact doubling, capped, then exhaustion.
  {
    Rig rig(2, 1);
    rig.config.retry.jitter_fraction = 0.0;
    rig.config.retry.max_retries = 5;
    rig.config.retry.base_delay = 1s;
    rig.config.retry.max_delay = 8s;
    rig.script.responses[{"a1", "q0"}] = {ProviderError::transient("upstream reset")};
    const auto m = rig.run();
    const auto t = rig.times_for({"a1", "q0"});
    const std::vector<double> expected = {1, 2, 4, 8, 8};
    std::vector<double> gaps;
    for (std::size_t i = 1; i < t.size(); ++i) gaps.push_back(seconds(t[i] - t[i - 1]));
    c.expect(gaps == expected, "backoff gaps differ from 1,2,4,8,8");
    const bool listed = m.uncompleted.size() == 1 && m.uncompleted[0].job == JobId{"a1", "q0"} &&
                        m.uncompleted[0].attempts == 6 &&
                        m.uncompleted[0].last_error == "transient: upstream reset";
    c.expect(listed, "exhausted job missing from uncompleted or wrong attempts/error");
    c.note("gaps 1,2,4,8,8s with cap 8s");
    c.note("exhausted after 6 attempts with last error kept");
  }
  return c.outcome();
}

Outcome profile_statistics() {
  Check c;
  auto schema = fx::demo_schema();
  schema.attributes.push_back(
      {"region", AttributeKind::categorical, {{"north", 0.4}, {"south", 0.3}, {"east", 0.2}, {"west", 0.1}}, 0, 0, ""});
  const std::size_t n = 10'000;
  const auto pop = generate_population(schema, n, 31337);

  std::size_t violations = 0;
  std::map<std::string, double> region;
  std::map<std::pair<std::string, std::string>, double> pair;
  for (const auto& p : pop) {
    const auto& g = std::get<std::string>(p.attributes.at("gender"));
    const auto& o = std::get<std::string>(p.attributes.at("orientation"));
    if (g == "male" && o == "lesbian") ++violations;
    region[std::get<std::string>(p.attributes.at("region"))] += 1.0 / n;
    pair[{g, o}] += 1.0 / n;
  }
  const std::map<std::string, double> region_target{{"north", 0.4}, {"south", 0.3}, {"east", 0.2}, {"west", 0.1}};
  double l1 = 0;
  for (const auto& [label, p] : region_target) l1 += std::abs(region[label] - p);

  // The constrained pair is checked against the renormalized product law.
  const std::map<std::string, double> g{{"female", 0.5}, {"male", 0.45}, {"nonbinary", 0.05}};
  const std::map<std::string, double> o{{"heterosexual", 0.8}, {"gay", 0.08}, {"lesbian", 0.07}, {"bisexual", 0.05}};
  double mass = 1.0 - 0.45 * 0.07;
  double pair_l1 = 0;
  for (const auto& [gl, gp] : g) {
    for (const auto& [ol, op] : o) {
      const double target = (gl == "male" && ol == "lesbian") ? 0.0 : gp * op / mass;
      pair_l1 += std::abs(pair[{gl, ol}] - target);
    }
  }

  const bool deterministic = generate_population(schema, n, 31337) == pop;
  const auto prefix = generate_population(schema, 2'500, 31337);
  const bool prefix_stable = std::equal(prefix.begin(), prefix.end(), pop.begin());

  c.expect(violations == 0, std::to_string(violations) + " forbid violations");
  c.expect(l1 < 0.05, "region L1 " + std::to_string(l1));
  c.expect(pair_l1 < 0.05, "gender x orientation L1 " + std::to_string(pair_l1));
  c.expect(deterministic, "same seed produced a different population");
  c.expect(prefix_stable, "shorter population is not a prefix");
  std::ostringstream s;
  s.precision(4);
  s << "10^4 samples, 0 forbid violations, region L1 " << l1 << ", constrained pair L1 " << pair_l1;
  if (violations == 0) c.note(s.str());
  c.note("deterministic and prefix-stable");
  return c.outcome();
}

Outcome format_pipeline() {
  Check c;
  Rig rig(50, 10);
  rig.config.format_repair_attempts = 2;
  rig.script.malformed_rate = 0.2;
  const auto m = rig.run();
  const auto records = rig.answers.records();
  std::size_t valid = 0;
  std::int64_t repaired = 0;
  for (const auto& r : records) {
    if (record_valid(r, *rig.in.survey)) ++valid;
    if (r.repairs > 0) ++repaired;
  }
  const double ok_rate = static_cast<double>(records.size()) / 500.0;
  c.expect(ok_rate >= 0.95, "ok rate " + std::to_string(ok_rate));
  c.expect(valid == records.size(), std::to_string(records.size() - valid) + " ok records fail re-validation");
  c.expect(records.size() + m.uncompleted.size() == 500, "records and uncompleted do not cover 500 jobs");
  std::ostringstream s;
  s.precision(4);
  s << "ok " << records.size() << "/500 (" << ok_rate * 100 << "%), " << repaired << " repaired, all re-validate";
  c.note(s.str());
  return c.outcome();
}

Outcome privacy_purge() {
  Check c;
  const auto dir = std::filesystem::temp_directory_path() / ("surveysim-acceptance-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::vector<std::string> run_ids;
  {
    StoreOptions so = memory_store();
    so.directory = dir;
    Store store(so);
    ServiceOptions options;
    options.store = &store;
    RunService service(options);
    const UserId user = service.register_user("leaving", "pw");
    const UserId other = service.register_user("staying", "pw");
    const std::string survey = serialize_survey(fx::demo_survey(3), SurveyFormat::structured_text);
    for (UserId who : {user, other}) {
      StartRequest req;
      req.config = fx::demo_config(3);
      req.survey_upload_id = service.upload(who, "json", "s.json", survey);
      const auto ok = service.start_run(who, req);
      req.mock_script_json = R"({"responses": {"a2/q2": [{"error": "fatal"}]}})";
      const auto failed = service.start_run(who, req);
      service.wait(ok.run_id);
      service.wait(failed.run_id);
      if (who == user) run_ids = {ok.run_id, failed.run_id};
    }
    const auto before = store.scan_user(user).total_simulation_rows();
    const PurgeReport report = service.delete_user_data(user);
    const UserScan scan = store.scan_user(user);
    c.expect(scan.total_simulation_rows() == 0, std::to_string(scan.total_simulation_rows()) + " simulation rows remain");
    c.expect(scan.credential_rows == 1, std::to_string(scan.credential_rows) + " credential rows");
    bool login_ok = true;
    try {
      (void)service.login("leaving", "pw");
    } catch (const std::exception&) {
      login_ok = false;
    }
    c.expect(login_ok, "authentication failed after purge");
    c.expect(store.scan_user(other).total_simulation_rows() > 0, "other user's data was removed");
    c.note("removed " + std::to_string(before) + " rows (" + std::to_string(report.answers) + " answers, " +
           std::to_string(report.runs) + " runs)");
    c.note("scan: 0 simulation rows, 1 credential row, login ok");
  }
  // The purged run ids must not survive anywhere in the database files.
  std::size_t hits = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    std::ifstream in(entry.path(), std::ios::binary);
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    for (const auto& id : run_ids) hits += bytes.find(id) != std::string::npos ? 1 : 0;
  }
  c.expect(hits == 0, std::to_string(hits) + " purged run ids still present in database files");
  std::filesystem::remove_all(dir);
  return c.outcome();
}

Outcome service_state_machine() {
  Check c;
  const std::set<std::pair<RunState, RunState>> declared = {
      {RunState::draft, RunState::running},       {RunState::running, RunState::completed},
      {RunState::running, RunState::failed},      {RunState::running, RunState::cancelling},
      {RunState::cancelling, RunState::cancelled}, {RunState::failed, RunState::running},
      {RunState::cancelled, RunState::running}};
  const std::string survey_text = serialize_survey(fx::demo_survey(3), SurveyFormat::structured_text);
  const std::vector<std::string> scripts = {
      "", R"({"failure_rate": 0.5})", R"({"responses": {"a1/q1": [{"error": "fatal"}]}})",
      R"({"latency_min_ms": 1, "latency_max_ms": 3})", R"({"malformed_rate": 0.6})"};
  std::mt19937_64 rng(77);
  std::size_t transitions = 0;
  std::size_t failed_downloads = 0;
  std::size_t operations = 0;
  std::size_t conflicts = 0;

  for (int seq = 0; seq < 1000; ++seq) {
    Store store(memory_store());
    ServiceOptions options;
    options.store = &store;
    auto service = std::make_unique<RunService>(options);
    const UserId user = service->register_user("u", "pw");
    const std::string survey = service->upload(user, "json", "s.json", survey_text);
    std::vector<std::string> runs;
    const int length = 4 + static_cast<int>(rng() % 8);
    for (int step = 0; step < length; ++step) {
      ++operations;
      const auto op = rng() % 7;
      try {
        if (op == 0 || runs.empty()) {
          StartRequest req;
          req.config = fx::demo_config(1 + static_cast<std::int64_t>(rng() % 3), rng());
          req.config.max_concurrency = 1 + static_cast<std::int64_t>(rng() % 3);
          req.config.retry.max_retries = static_cast<std::int64_t>(rng() % 2);
          req.config.retry.base_delay = 1ms;
          req.config.retry.max_delay = 2ms;
          req.config.format_repair_attempts = static_cast<std::int64_t>(rng() % 2);
          req.survey_upload_id = survey;
          req.mock_script_json = scripts[rng() % scripts.size()];
          runs.push_back(service->start_run(user, req).run_id);
        } else {
          const std::string& id = runs[rng() % runs.size()];
          switch (op) {
            case 1: service->cancel_run(user, id); break;
            case 2: (void)service->resume_run(user, id); break;
            case 3: service->wait(id); break;
            case 4: (void)service->get_run(user, id); break;
            case 5: (void)service->download(user, id, rng() % 2 ? "csv" : "jsonl"); break;
            default: (void)service->metrics(user, id)->snapshot(); break;
          }
        }
      } catch (const StateConflict&) {
        ++conflicts;
      } catch (const NotFound&) {
        ++conflicts;  // manifest not written yet
      } catch (const std::exception& e) {
        c.expect(false, std::string("unexpected error: ") + e.what());
      }
    }
    service->wait_all();

    // Per-run transition chains must start at draft, follow declared edges
    // and agree with the state stored for the run.
    std::map<std::string, RunState> last;
    for (const auto& t : service->transitions()) {
      ++transitions;
      c.expect(declared.contains({t.from, t.to}), "undeclared transition " + std::string(to_string(t.from)) + " -> " +
                                                     std::string(to_string(t.to)));
      const RunState expected_from = last.contains(t.run_id) ? last[t.run_id] : RunState::draft;
      c.expect(t.from == expected_from, "transition chain broken for " + t.run_id);
      last[t.run_id] = t.to;
    }
    for (const auto& id : runs) {
      const RunHandle h = service->get_run(user, id);
      c.expect(last.contains(id) && last[id] == h.state, "stored state disagrees with transition log");
      c.expect(h.state == RunState::completed || h.state == RunState::failed || h.state == RunState::cancelled,
               "run left in a non-terminal state");
      if (h.state != RunState::failed) continue;
      ++failed_downloads;
      const auto stored = store.stream_results(user, id);
      const auto hash = config_hash(nlohmann::json::parse(store.get_run(user, id).config_json).get<SimulationConfig>());
      c.expect(service->download(user, id, "csv") == export_results(stored, ExportFormat::csv, hash),
               "failed-run csv differs from store");
      c.expect(service->download(user, id, "jsonl") == export_results(stored, ExportFormat::jsonl, hash),
               "failed-run jsonl differs from store");
      const auto text = store.manifest_text(user, id);
      c.expect(text && service->download(user, id, "manifest") == *text, "failed-run manifest differs from store");
    }
  }
  c.note("1000 sequences, " + std::to_string(operations) + " calls, " + std::to_string(transitions) + " transitions");
  c.note(std::to_string(conflicts) + " rejected calls");
  c.note(std::to_string(failed_downloads) + " failed runs downloaded byte-identical");
  return c.outcome();
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"end-to-end desk run", end_to_end},
      {"scale and memory", scale_memory},
      {"rate safety", rate_safety},
      {"crash sweep", crash_sweep},
      {"retry and backoff", retry_backoff},
      {"profile statistics", profile_statistics},
      {"format pipeline", format_pipeline},
      {"privacy purge", privacy_purge},
      {"service state machine", service_state_machine},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double took = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ostringstream t;
    t.precision(2);
    t << std::fixed << took;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << " [" << t.str() << "s]" << std::endl;
    if (!o.pass) ++failed;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}

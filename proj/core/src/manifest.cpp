// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#include "surveysim/manifest.hpp"

#include <fstream>
#include <sstream>
#include <system_error>

#include "surveysim/digest.hpp"
#include "surveysim/errors.hpp"

namespace surveysim {

namespace {

using nlohmann::json;

json body_json(const RunManifest& m) {
  json completed = json::array();
  for (const auto& id : m.completed) completed.push_back({id.agent_id, id.question_id});
  json uncompleted = json::array();
  for (const auto& u : m.uncompleted) {
    uncompleted.push_back({{"agent_id", u.job.agent_id},
                           {"question_id", u.job.question_id},
                           {"last_error", u.last_error},
                           {"attempts", u.attempts}});
  }
  return json{{"format", kManifestFormat},
              {"version", kManifestVersion},
              {"run_id", m.run_id},
              {"config_hash", m.config_hash},
              {"directive_version", m.directive_version},
              {"total_jobs", m.total_jobs},
              {"status", to_string(m.status)},
              {"failure", m.failure},
              {"cursor", {{"agent_index", m.cursor.agent_index}, {"question_index", m.cursor.question_index}}},
              {"completed", std::move(completed)},
              {"uncompleted", std::move(uncompleted)}};
}

[[noreturn]] void fail(const std::string& message) { throw ParseError({{0, message}}); }

std::optional<std::string> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::running: return "running";
    case RunStatus::completed: return "completed";
    case RunStatus::completed_with_failures: return "completed-with-failures";
    case RunStatus::cancelled: return "cancelled";
    case RunStatus::aborted: return "aborted";
  }
  return "running";
}

RunStatus parse_run_status(std::string_view s) {
  for (auto st : {RunStatus::running, RunStatus::completed, RunStatus::completed_with_failures, RunStatus::cancelled,
                  RunStatus::aborted}) {
    if (to_string(st) == s) return st;
  }
  throw std::invalid_argument("unknown run status: " + std::string(s));
}

std::string serialize_manifest(const RunManifest& manifest) {
  json j = body_json(manifest);
  j["checksum"] = sha256_hex(j.dump());
  return j.dump(2) + "\n";
}

RunManifest parse_manifest(std::string_view text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) fail("manifest is not a JSON object");
  if (j.value("format", "") != kManifestFormat) fail("not a run manifest");
  if (j.value("version", 0) != kManifestVersion) fail("unsupported manifest version");
  auto it = j.find("checksum");
  if (it == j.end() || !it->is_string()) fail("manifest has no checksum");
  const std::string checksum = it->get<std::string>();
  j.erase("checksum");
  if (sha256_hex(j.dump()) != checksum) fail("manifest checksum mismatch");

  try {
    RunManifest m;
    m.run_id = j.at("run_id").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.directive_version = j.at("directive_version").get<std::string>();
    m.total_jobs = j.at("total_jobs").get<std::size_t>();
    m.status = parse_run_status(j.at("status").get<std::string>());
    m.failure = j.value("failure", "");
    m.cursor.agent_index = j.at("cursor").at("agent_index").get<std::size_t>();
    m.cursor.question_index = j.at("cursor").at("question_index").get<std::size_t>();
    for (const auto& c : j.at("completed")) m.completed.insert({c.at(0).get<std::string>(), c.at(1).get<std::string>()});
    for (const auto& u : j.at("uncompleted")) {
      m.uncompleted.push_back({{u.at("agent_id").get<std::string>(), u.at("question_id").get<std::string>()},
                               u.at("last_error").get<std::string>(),
                               u.at("attempts").get<std::int64_t>()});
    }
    return m;
  } catch (const json::exception& e) {
    fail(std::string("malformed manifest: ") + e.what());
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
}

void MemoryCheckpointSink::write(const RunManifest& manifest) {
  std::lock_guard lock(mutex_);
  latest_ = manifest;
  ++writes_;
}

std::optional<RunManifest> MemoryCheckpointSink::latest() const {
  std::lock_guard lock(mutex_);
  return latest_;
}

std::size_t MemoryCheckpointSink::writes() const {
  std::lock_guard lock(mutex_);
  return writes_;
}

ManifestFile::ManifestFile(std::filesystem::path path) : path_(std::move(path)) {}

void ManifestFile::write(const RunManifest& manifest) {
  namespace fs = std::filesystem;
  const fs::path tmp = fs::path(path_).concat(".tmp");
  const fs::path previous = fs::path(path_).concat(".1");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << serialize_manifest(manifest);
    out.flush();
    if (!out) throw Error("short write to " + tmp.string());
  }
  std::error_code ec;
  if (fs::exists(path_, ec)) fs::rename(path_, previous, ec);
  fs::rename(tmp, path_);
}

std::optional<RunManifest> ManifestFile::load_latest() const {
  return load_manifest_file(path_);
}

std::optional<RunManifest> load_manifest_file(const std::filesystem::path& path) {
  for (const auto& candidate : {path, std::filesystem::path(path).concat(".1")}) {
    auto text = read_file(candidate);
    if (!text) continue;
    try {
      return parse_manifest(*text);
    } catch (const ParseError&) {
      continue;
    }
  }
  return std::nullopt;
}

JobStream make_resume_stream(const RunManifest& manifest, const SimulationConfig& config,
                             std::shared_ptr<const std::vector<AgentProfile>> population,
                             std::shared_ptr<const SurveySpec> survey, const JobIdSet& already_saved) {
  if (manifest.config_hash != config_hash(config)) {
    throw ConfigMismatch("manifest was written under a different configuration; refusing to resume");
  }
  auto skip = std::make_shared<JobIdSet>(manifest.completed);
  skip->insert(already_saved.begin(), already_saved.end());
  return JobStream(std::move(population), std::move(survey), static_cast<std::size_t>(config.buffer_size), {},
                   std::move(skip));
}

}  // namespace surveysim

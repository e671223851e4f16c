// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "surveysim/config.hpp"
#include "surveysim/jobs.hpp"

namespace surveysim {

inline constexpr std::string_view kManifestFormat = "surveysim-manifest";
inline constexpr int kManifestVersion = 1;

struct UncompletedJob {
  JobId job;
  std::string last_error;
  std::int64_t attempts = 0;

  bool operator==(const UncompletedJob&) const = default;
};

enum class RunStatus { running, completed, completed_with_failures, cancelled, aborted };

[[nodiscard]] std::string_view to_string(RunStatus status);
[[nodiscard]] RunStatus parse_run_status(std::string_view s);

struct RunManifest {
  std::string run_id;
  std::string config_hash;
  std::string directive_version;
  std::size_t total_jobs = 0;
  RunStatus status = RunStatus::running;
  JobIdSet completed;
  std::vector<UncompletedJob> uncompleted;
  JobCursor cursor;
  /// Why the run stopped early; empty unless status is aborted.
  std::string failure;

  bool operator==(const RunManifest&) const = default;
};

/// Serialized form carries a format tag, a version and a SHA-256 checksum of
/// the remaining fields.
[[nodiscard]] std::string serialize_manifest(const RunManifest& manifest);

/// Throws ParseError on malformed text, unknown format or version, or a
/// checksum mismatch (a torn or edited snapshot).
[[nodiscard]] RunManifest parse_manifest(std::string_view text);

class CheckpointSink {
 public:
  virtual ~CheckpointSink() = default;
  virtual void write(const RunManifest& manifest) = 0;
};

class MemoryCheckpointSink final : public CheckpointSink {
 public:
  void write(const RunManifest& manifest) override;
  [[nodiscard]] std::optional<RunManifest> latest() const;
  [[nodiscard]] std::size_t writes() const;

 private:
  mutable std::mutex mutex_;
  std::optional<RunManifest> latest_;
  std::size_t writes_ = 0;
};

/// Snapshot file written by temp-file-and-rename, keeping the previous
/// snapshot as "<path>.1" so that a damaged latest file still leaves one
/// complete snapshot to recover from.
class ManifestFile final : public CheckpointSink {
 public:
  explicit ManifestFile(std::filesystem::path path);

  void write(const RunManifest& manifest) override;

  /// The newest snapshot that passes its checksum, if any.
  [[nodiscard]] std::optional<RunManifest> load_latest() const;
  [[nodiscard]] const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

[[nodiscard]] std::optional<RunManifest> load_manifest_file(const std::filesystem::path& path);

/// Jobs of the cross product that are in neither `manifest.completed` nor
/// `already_saved`, in row-major order. Throws ConfigMismatch when the
/// manifest was written under a different configuration.
[[nodiscard]] JobStream make_resume_stream(const RunManifest& manifest, const SimulationConfig& config,
                                           std::shared_ptr<const std::vector<AgentProfile>> population,
                                           std::shared_ptr<const SurveySpec> survey,
                                           const JobIdSet& already_saved = {});

}  // namespace surveysim

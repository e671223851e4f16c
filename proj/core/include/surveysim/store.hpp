// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "surveysim/clock.hpp"
#include "surveysim/manifest.hpp"
#include "surveysim/records.hpp"

namespace surveysim {

using UserId = std::int64_t;

/// Work factor for credential hashing. `minimum` exists for tests.
enum class HashCost { minimum, interactive, moderate };

struct StoreOptions {
  /// Holds credentials.db and simulation.db. Empty keeps both in memory.
  std::filesystem::path directory;
  HashCost hash_cost = HashCost::interactive;
  std::chrono::seconds session_ttl = std::chrono::hours(12);
  /// Used for session expiry; null means the system steady clock.
  const Clock* clock = nullptr;
};

struct UserRecord {
  UserId user_id = 0;
  std::string login_name;
  std::string credential_hash;
  std::int64_t created_at_ms = 0;
};

struct RunRow {
  std::string run_id;
  UserId owner = 0;
  std::string state;
  std::string run_key;
  std::string config_json;
  std::string survey_json;
  std::string population_ref;
  std::string mock_script_json;
  std::string failure;
  std::int64_t created_at_ms = 0;
  std::int64_t updated_at_ms = 0;
};

struct UploadRow {
  std::string upload_id;
  UserId owner = 0;
  std::string format;
  std::string filename;
  std::string content;
  std::int64_t created_at_ms = 0;
};

struct PurgeReport {
  std::int64_t runs = 0;
  std::int64_t populations = 0;
  std::int64_t uploads = 0;
  std::int64_t answers = 0;
  std::int64_t manifests = 0;

  [[nodiscard]] bool empty() const { return runs + populations + uploads + answers + manifests == 0; }
  bool operator==(const PurgeReport&) const = default;
};

/// Result of scanning every table for rows keyed to one user.
struct UserScan {
  std::map<std::string, std::int64_t> simulation_rows;  // table -> rows
  std::int64_t credential_rows = 0;

  [[nodiscard]] std::int64_t total_simulation_rows() const;
};

/// Two physically separate SQLite databases: one for credentials, one for
/// everything a user's simulations produce. Every simulation row carries its
/// owner so that purging a user is a keyed delete in every table.
class Store {
 public:
  explicit Store(StoreOptions options = {});
  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  UserId create_user(const std::string& login, const std::string& secret);
  /// Returns a session token. Unknown login and wrong secret raise the same
  /// AuthDenied.
  std::string authenticate(const std::string& login, const std::string& secret);
  [[nodiscard]] UserId user_for_token(const std::string& token);
  [[nodiscard]] std::optional<UserRecord> find_user(UserId user) const;

  void create_run(const RunRow& run);
  /// NotFound when absent; AccessDenied when owned by someone else.
  [[nodiscard]] RunRow get_run(UserId user, const std::string& run_id) const;
  [[nodiscard]] std::optional<RunRow> find_run_by_key(UserId user, const std::string& run_key) const;
  [[nodiscard]] std::vector<RunRow> list_runs(UserId user) const;
  [[nodiscard]] std::vector<RunRow> runs_in_state(const std::string& state) const;
  void update_run_state(const std::string& run_id, const std::string& state, const std::string& failure = {});

  void save_population(UserId user, const std::string& population_id, const std::string& run_id,
                       const std::string& csv);
  [[nodiscard]] std::optional<std::string> load_population(UserId user, const std::string& population_id) const;

  std::string save_upload(UserId user, const std::string& format, const std::string& filename,
                          const std::string& content);
  [[nodiscard]] UploadRow get_upload(UserId user, const std::string& upload_id) const;

  /// Idempotent on (run_id, agent_id, question_id): returns false and leaves
  /// the stored record untouched when the key exists.
  bool save_answer(UserId user, const AnswerRecord& record);
  /// Ordered by (agent_index, question_index).
  [[nodiscard]] std::vector<AnswerRecord> stream_results(UserId user, const std::string& run_id) const;
  void for_each_result(UserId user, const std::string& run_id,
                       const std::function<void(const AnswerRecord&)>& fn) const;
  [[nodiscard]] JobIdSet answer_keys(UserId user, const std::string& run_id) const;
  [[nodiscard]] std::int64_t answer_count(UserId user, const std::string& run_id) const;

  void save_manifest(UserId user, const RunManifest& manifest);
  [[nodiscard]] std::optional<RunManifest> load_manifest(UserId user, const std::string& run_id) const;
  [[nodiscard]] std::optional<std::string> manifest_text(UserId user, const std::string& run_id) const;

  PurgeReport delete_user_data(UserId user);
  [[nodiscard]] UserScan scan_user(UserId user) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

class StoreAnswerSink final : public AnswerSink {
 public:
  StoreAnswerSink(Store& store, UserId user) : store_(store), user_(user) {}
  void save(const AnswerRecord& record) override { store_.save_answer(user_, record); }

 private:
  Store& store_;
  UserId user_;
};

class StoreCheckpointSink final : public CheckpointSink {
 public:
  StoreCheckpointSink(Store& store, UserId user) : store_(store), user_(user) {}
  void write(const RunManifest& manifest) override { store_.save_manifest(user_, manifest); }

 private:
  Store& store_;
  UserId user_;
};

}  // namespace surveysim

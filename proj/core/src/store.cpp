// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#include "surveysim/store.hpp"

#include <sodium.h>
#include <sqlite3.h>

#include <stdexcept>

#include "surveysim/digest.hpp"
#include "surveysim/errors.hpp"

namespace surveysim {

namespace {

std::int64_t wall_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

class Db {
 public:
  explicit Db(const std::string& path) {
    const int flags = SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX | SQLITE_OPEN_URI;
    if (sqlite3_open_v2(path.c_str(), &db_, flags, nullptr) != SQLITE_OK) {
      std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
      sqlite3_close(db_);
      throw Error("cannot open database " + path + ": " + msg);
    }
    sqlite3_busy_timeout(db_, 5000);
  }
  ~Db() { sqlite3_close(db_); }
  Db(const Db&) = delete;
  Db& operator=(const Db&) = delete;

  void exec(const std::string& sql) {
    char* err = nullptr;
    if (sqlite3_exec(db_, sql.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
      std::string msg = err ? err : "unknown error";
      sqlite3_free(err);
      throw Error("sqlite: " + msg);
    }
  }
  [[nodiscard]] sqlite3* handle() const { return db_; }
  [[nodiscard]] std::int64_t changes() const { return sqlite3_changes(db_); }

 private:
  sqlite3* db_ = nullptr;
};

class Stmt {
 public:
  Stmt(const Db& db, const char* sql) : db_(db.handle()) {
    if (sqlite3_prepare_v2(db_, sql, -1, &stmt_, nullptr) != SQLITE_OK) {
      throw Error(std::string("sqlite prepare: ") + sqlite3_errmsg(db_));
    }
  }
  ~Stmt() { sqlite3_finalize(stmt_); }
  Stmt(const Stmt&) = delete;
  Stmt& operator=(const Stmt&) = delete;

  Stmt& bind(int i, std::int64_t v) {
    sqlite3_bind_int64(stmt_, i, v);
    return *this;
  }
  Stmt& bind(int i, const std::string& v) {
    sqlite3_bind_text(stmt_, i, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT);
    return *this;
  }
  Stmt& bind(int i, const std::optional<std::string>& v) {
    if (v) return bind(i, *v);
    sqlite3_bind_null(stmt_, i);
    return *this;
  }
  Stmt& bind_blob(int i, const std::string& v) {
    sqlite3_bind_blob(stmt_, i, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT);
    return *this;
  }

  /// True while rows remain.
  bool step() {
    const int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    if (rc == SQLITE_CONSTRAINT) throw std::invalid_argument(sqlite3_errmsg(db_));
    throw Error(std::string("sqlite step: ") + sqlite3_errmsg(db_));
  }

  [[nodiscard]] std::int64_t i64(int col) const { return sqlite3_column_int64(stmt_, col); }
  [[nodiscard]] std::string text(int col) const {
    const auto* p = sqlite3_column_text(stmt_, col);
    return p ? std::string(reinterpret_cast<const char*>(p), static_cast<std::size_t>(sqlite3_column_bytes(stmt_, col)))
             : std::string();
  }
  [[nodiscard]] std::optional<std::string> opt_text(int col) const {
    if (sqlite3_column_type(stmt_, col) == SQLITE_NULL) return std::nullopt;
    return text(col);
  }
  [[nodiscard]] std::string blob(int col) const {
    const void* p = sqlite3_column_blob(stmt_, col);
    return p ? std::string(static_cast<const char*>(p), static_cast<std::size_t>(sqlite3_column_bytes(stmt_, col)))
             : std::string();
  }

 private:
  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

void configure(Db& db, bool file_backed) {
  db.exec("PRAGMA secure_delete=ON; PRAGMA foreign_keys=ON;");
  if (file_backed) db.exec("PRAGMA journal_mode=WAL; PRAGMA synchronous=FULL;");
}

constexpr const char* kCredentialSchema = R"sql(
CREATE TABLE IF NOT EXISTS users (
  user_id INTEGER PRIMARY KEY AUTOINCREMENT,
  login_name TEXT NOT NULL UNIQUE,
  credential_hash TEXT NOT NULL,
  created_at_ms INTEGER NOT NULL
);
)sql";

constexpr const char* kSimulationSchema = R"sql(
CREATE TABLE IF NOT EXISTS runs (
  run_id TEXT PRIMARY KEY,
  owner_id INTEGER NOT NULL,
  state TEXT NOT NULL,
  run_key TEXT,
  config_json TEXT NOT NULL,
  survey_json TEXT NOT NULL,
  population_ref TEXT,
  mock_script_json TEXT,
  failure TEXT,
  created_at_ms INTEGER NOT NULL,
  updated_at_ms INTEGER NOT NULL
);
CREATE UNIQUE INDEX IF NOT EXISTS runs_by_key ON runs(owner_id, run_key) WHERE run_key IS NOT NULL;
CREATE INDEX IF NOT EXISTS runs_by_owner ON runs(owner_id);
CREATE TABLE IF NOT EXISTS populations (
  population_id TEXT PRIMARY KEY,
  owner_id INTEGER NOT NULL,
  run_id TEXT,
  csv TEXT NOT NULL,
  created_at_ms INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS uploads (
  upload_id TEXT PRIMARY KEY,
  owner_id INTEGER NOT NULL,
  format TEXT NOT NULL,
  filename TEXT,
  content BLOB NOT NULL,
  created_at_ms INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS answers (
  run_id TEXT NOT NULL,
  agent_id TEXT NOT NULL,
  question_id TEXT NOT NULL,
  owner_id INTEGER NOT NULL,
  agent_index INTEGER NOT NULL,
  question_index INTEGER NOT NULL,
  value TEXT NOT NULL,
  reasoning TEXT,
  raw TEXT NOT NULL,
  input_tokens INTEGER NOT NULL,
  output_tokens INTEGER NOT NULL,
  attempts INTEGER NOT NULL,
  repairs INTEGER NOT NULL,
  status TEXT NOT NULL,
  config_hash TEXT NOT NULL,
  directive_version TEXT NOT NULL,
  created_at_ms INTEGER NOT NULL,
  PRIMARY KEY (run_id, agent_id, question_id)
);
CREATE INDEX IF NOT EXISTS answers_order ON answers(run_id, agent_index, question_index);
CREATE INDEX IF NOT EXISTS answers_by_owner ON answers(owner_id);
CREATE TABLE IF NOT EXISTS manifests (
  run_id TEXT PRIMARY KEY,
  owner_id INTEGER NOT NULL,
  content TEXT NOT NULL,
  updated_at_ms INTEGER NOT NULL
);
)sql";

constexpr const char* kRunColumns =
    "run_id, owner_id, state, run_key, config_json, survey_json, population_ref, mock_script_json, failure, "
    "created_at_ms, updated_at_ms";

RunRow read_run(const Stmt& s) {
  RunRow r;
  r.run_id = s.text(0);
  r.owner = s.i64(1);
  r.state = s.text(2);
  r.run_key = s.text(3);
  r.config_json = s.text(4);
  r.survey_json = s.text(5);
  r.population_ref = s.text(6);
  r.mock_script_json = s.text(7);
  r.failure = s.text(8);
  r.created_at_ms = s.i64(9);
  r.updated_at_ms = s.i64(10);
  return r;
}

AnswerRecord read_answer(const Stmt& s) {
  AnswerRecord r;
  r.run_id = s.text(0);
  r.job = {s.text(1), s.text(2)};
  r.agent_index = static_cast<std::size_t>(s.i64(3));
  r.question_index = static_cast<std::size_t>(s.i64(4));
  r.value = s.text(5);
  r.reasoning = s.opt_text(6);
  r.raw = s.text(7);
  r.usage = {s.i64(8), s.i64(9)};
  r.attempts = s.i64(10);
  r.repairs = s.i64(11);
  r.status = s.text(12);
  r.config_hash = s.text(13);
  r.directive_version = s.text(14);
  r.created_at_ms = s.i64(15);
  return r;
}

std::pair<unsigned long long, std::size_t> hash_limits(HashCost cost) {
  switch (cost) {
    case HashCost::minimum: return {crypto_pwhash_OPSLIMIT_MIN, crypto_pwhash_MEMLIMIT_MIN};
    case HashCost::interactive: return {crypto_pwhash_OPSLIMIT_INTERACTIVE, crypto_pwhash_MEMLIMIT_INTERACTIVE};
    case HashCost::moderate: return {crypto_pwhash_OPSLIMIT_MODERATE, crypto_pwhash_MEMLIMIT_MODERATE};
  }
  return {crypto_pwhash_OPSLIMIT_INTERACTIVE, crypto_pwhash_MEMLIMIT_INTERACTIVE};
}

std::string hash_secret(const std::string& secret, HashCost cost) {
  const auto [ops, mem] = hash_limits(cost);
  char out[crypto_pwhash_STRBYTES];
  if (crypto_pwhash_str(out, secret.data(), secret.size(), ops, mem) != 0) throw Error("credential hashing failed");
  return out;
}

bool verify_secret(const std::string& hash, const std::string& secret) {
  return crypto_pwhash_str_verify(hash.c_str(), secret.data(), secret.size()) == 0;
}

}  // namespace

std::int64_t UserScan::total_simulation_rows() const {
  std::int64_t n = 0;
  for (const auto& [table, rows] : simulation_rows) n += rows;
  return n;
}

struct Store::Impl {
  StoreOptions options;
  SystemClock system_clock;
  const Clock* clock;
  bool file_backed;
  std::unique_ptr<Db> credentials;
  std::unique_ptr<Db> simulation;
  mutable std::mutex cred_mutex;
  mutable std::mutex sim_mutex;
  std::string dummy_hash;

  struct Session {
    UserId user;
    TimePoint expires;
  };
  std::mutex session_mutex;
  std::map<std::string, Session> sessions;

  explicit Impl(StoreOptions o) : options(std::move(o)) {
    if (sodium_init() < 0) throw Error("libsodium failed to initialise");
    clock = options.clock ? options.clock : &system_clock;
    file_backed = !options.directory.empty();
    std::string cred_path = ":memory:";
    std::string sim_path = ":memory:";
    if (file_backed) {
      std::filesystem::create_directories(options.directory);
      cred_path = (options.directory / "credentials.db").string();
      sim_path = (options.directory / "simulation.db").string();
    }
    credentials = std::make_unique<Db>(cred_path);
    simulation = std::make_unique<Db>(sim_path);
    configure(*credentials, file_backed);
    configure(*simulation, file_backed);
    credentials->exec(kCredentialSchema);
    simulation->exec(kSimulationSchema);
    dummy_hash = hash_secret(random_hex(16), options.hash_cost);
  }

  UserId owner_of(const std::string& run_id) const {
    Stmt s(*simulation, "SELECT owner_id FROM runs WHERE run_id = ?");
    s.bind(1, run_id);
    if (!s.step()) throw NotFound("no run " + run_id);
    return s.i64(0);
  }

  void require_owner(UserId user, const std::string& run_id) const {
    if (owner_of(run_id) != user) throw AccessDenied();
  }
};

Store::Store(StoreOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}
Store::~Store() = default;

UserId Store::create_user(const std::string& login, const std::string& secret) {
  if (login.empty()) {
    ValidationReport r;
    r.add("login", "must not be empty");
    throw ValidationError(r);
  }
  const std::string hash = hash_secret(secret, impl_->options.hash_cost);
  std::lock_guard lock(impl_->cred_mutex);
  Stmt s(*impl_->credentials, "INSERT INTO users (login_name, credential_hash, created_at_ms) VALUES (?, ?, ?)");
  s.bind(1, login).bind(2, hash).bind(3, wall_ms());
  try {
    s.step();
  } catch (const std::invalid_argument&) {
    throw DuplicateLogin();
  }
  return sqlite3_last_insert_rowid(impl_->credentials->handle());
}

std::string Store::authenticate(const std::string& login, const std::string& secret) {
  std::optional<std::pair<UserId, std::string>> found;
  {
    std::lock_guard lock(impl_->cred_mutex);
    Stmt s(*impl_->credentials, "SELECT user_id, credential_hash FROM users WHERE login_name = ?");
    s.bind(1, login);
    if (s.step()) found.emplace(s.i64(0), s.text(1));
  }
  // Unknown logins still pay for one verification so the two denials look
  // alike from outside.
  const bool ok = found ? verify_secret(found->second, secret) : (verify_secret(impl_->dummy_hash, secret), false);
  if (!ok) throw AuthDenied();

  std::string token = random_hex(32);
  std::lock_guard lock(impl_->session_mutex);
  impl_->sessions[token] = {found->first, impl_->clock->now() + impl_->options.session_ttl};
  return token;
}

UserId Store::user_for_token(const std::string& token) {
  std::lock_guard lock(impl_->session_mutex);
  auto it = impl_->sessions.find(token);
  if (it == impl_->sessions.end()) throw AuthDenied();
  if (impl_->clock->now() >= it->second.expires) {
    impl_->sessions.erase(it);
    throw AuthDenied();
  }
  return it->second.user;
}

std::optional<UserRecord> Store::find_user(UserId user) const {
  std::lock_guard lock(impl_->cred_mutex);
  Stmt s(*impl_->credentials, "SELECT user_id, login_name, credential_hash, created_at_ms FROM users WHERE user_id = ?");
  s.bind(1, user);
  if (!s.step()) return std::nullopt;
  return UserRecord{s.i64(0), s.text(1), s.text(2), s.i64(3)};
}

void Store::create_run(const RunRow& run) {
  std::lock_guard lock(impl_->sim_mutex);
  Stmt s(*impl_->simulation,
         "INSERT INTO runs (run_id, owner_id, state, run_key, config_json, survey_json, population_ref, "
         "mock_script_json, failure, created_at_ms, updated_at_ms) VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)");
  const std::int64_t now = run.created_at_ms ? run.created_at_ms : wall_ms();
  s.bind(1, run.run_id).bind(2, run.owner).bind(3, run.state);
  s.bind(4, run.run_key.empty() ? std::optional<std::string>() : std::optional<std::string>(run.run_key));
  s.bind(5, run.config_json).bind(6, run.survey_json).bind(7, run.population_ref).bind(8, run.mock_script_json);
  s.bind(9, run.failure).bind(10, now).bind(11, now);
  try {
    s.step();
  } catch (const std::invalid_argument&) {
    throw StateConflict("a run with this id or key already exists");
  }
}

RunRow Store::get_run(UserId user, const std::string& run_id) const {
  std::lock_guard lock(impl_->sim_mutex);
  const std::string sql = std::string("SELECT ") + kRunColumns + " FROM runs WHERE run_id = ?";
  Stmt s(*impl_->simulation, sql.c_str());
  s.bind(1, run_id);
  if (!s.step()) throw NotFound("no run " + run_id);
  RunRow r = read_run(s);
  if (r.owner != user) throw AccessDenied();
  return r;
}

std::optional<RunRow> Store::find_run_by_key(UserId user, const std::string& run_key) const {
  std::lock_guard lock(impl_->sim_mutex);
  const std::string sql = std::string("SELECT ") + kRunColumns + " FROM runs WHERE owner_id = ? AND run_key = ?";
  Stmt s(*impl_->simulation, sql.c_str());
  s.bind(1, user).bind(2, run_key);
  if (!s.step()) return std::nullopt;
  return read_run(s);
}

std::vector<RunRow> Store::list_runs(UserId user) const {
  std::lock_guard lock(impl_->sim_mutex);
  const std::string sql =
      std::string("SELECT ") + kRunColumns + " FROM runs WHERE owner_id = ? ORDER BY created_at_ms, run_id";
  Stmt s(*impl_->simulation, sql.c_str());
  s.bind(1, user);
  std::vector<RunRow> out;
  while (s.step()) out.push_back(read_run(s));
  return out;
}

std::vector<RunRow> Store::runs_in_state(const std::string& state) const {
  std::lock_guard lock(impl_->sim_mutex);
  const std::string sql = std::string("SELECT ") + kRunColumns + " FROM runs WHERE state = ? ORDER BY run_id";
  Stmt s(*impl_->simulation, sql.c_str());
  s.bind(1, state);
  std::vector<RunRow> out;
  while (s.step()) out.push_back(read_run(s));
  return out;
}

void Store::update_run_state(const std::string& run_id, const std::string& state, const std::string& failure) {
  std::lock_guard lock(impl_->sim_mutex);
  Stmt s(*impl_->simulation, "UPDATE runs SET state = ?, failure = ?, updated_at_ms = ? WHERE run_id = ?");
  s.bind(1, state).bind(2, failure).bind(3, wall_ms()).bind(4, run_id);
  s.step();
  if (impl_->simulation->changes() == 0) throw NotFound("no run " + run_id);
}

void Store::save_population(UserId user, const std::string& population_id, const std::string& run_id,
                            const std::string& csv) {
  std::lock_guard lock(impl_->sim_mutex);
  Stmt s(*impl_->simulation,
         "INSERT OR REPLACE INTO populations (population_id, owner_id, run_id, csv, created_at_ms) VALUES (?, ?, ?, ?, ?)");
  s.bind(1, population_id).bind(2, user).bind(3, run_id).bind(4, csv).bind(5, wall_ms());
  s.step();
}

std::optional<std::string> Store::load_population(UserId user, const std::string& population_id) const {
  std::lock_guard lock(impl_->sim_mutex);
  Stmt s(*impl_->simulation, "SELECT owner_id, csv FROM populations WHERE population_id = ?");
  s.bind(1, population_id);
  if (!s.step()) return std::nullopt;
  if (s.i64(0) != user) throw AccessDenied();
  return s.text(1);
}

std::string Store::save_upload(UserId user, const std::string& format, const std::string& filename,
                               const std::string& content) {
  std::string id = "up-" + random_hex(8);
  std::lock_guard lock(impl_->sim_mutex);
  Stmt s(*impl_->simulation,
         "INSERT INTO uploads (upload_id, owner_id, format, filename, content, created_at_ms) VALUES (?, ?, ?, ?, ?, ?)");
  s.bind(1, id).bind(2, user).bind(3, format).bind(4, filename).bind_blob(5, content).bind(6, wall_ms());
  s.step();
  return id;
}

UploadRow Store::get_upload(UserId user, const std::string& upload_id) const {
  std::lock_guard lock(impl_->sim_mutex);
  Stmt s(*impl_->simulation,
         "SELECT upload_id, owner_id, format, filename, content, created_at_ms FROM uploads WHERE upload_id = ?");
  s.bind(1, upload_id);
  if (!s.step()) throw NotFound("no upload " + upload_id);
  UploadRow u{s.text(0), s.i64(1), s.text(2), s.text(3), s.blob(4), s.i64(5)};
  if (u.owner != user) throw AccessDenied();
  return u;
}

bool Store::save_answer(UserId user, const AnswerRecord& r) {
  std::lock_guard lock(impl_->sim_mutex);
  impl_->require_owner(user, r.run_id);
  Stmt s(*impl_->simulation,
         "INSERT OR IGNORE INTO answers (run_id, agent_id, question_id, owner_id, agent_index, question_index, value, "
         "reasoning, raw, input_tokens, output_tokens, attempts, repairs, status, config_hash, directive_version, "
         "created_at_ms) VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)");
  s.bind(1, r.run_id).bind(2, r.job.agent_id).bind(3, r.job.question_id).bind(4, user);
  s.bind(5, static_cast<std::int64_t>(r.agent_index)).bind(6, static_cast<std::int64_t>(r.question_index));
  s.bind(7, r.value).bind(8, r.reasoning).bind(9, r.raw);
  s.bind(10, r.usage.input_tokens).bind(11, r.usage.output_tokens).bind(12, r.attempts).bind(13, r.repairs);
  s.bind(14, r.status).bind(15, r.config_hash).bind(16, r.directive_version).bind(17, r.created_at_ms);
  s.step();
  return impl_->simulation->changes() > 0;
}

void Store::for_each_result(UserId user, const std::string& run_id,
                            const std::function<void(const AnswerRecord&)>& fn) const {
  std::lock_guard lock(impl_->sim_mutex);
  impl_->require_owner(user, run_id);
  Stmt s(*impl_->simulation,
         "SELECT run_id, agent_id, question_id, agent_index, question_index, value, reasoning, raw, input_tokens, "
         "output_tokens, attempts, repairs, status, config_hash, directive_version, created_at_ms FROM answers "
         "WHERE run_id = ? ORDER BY agent_index, question_index");
  s.bind(1, run_id);
  while (s.step()) fn(read_answer(s));
}

std::vector<AnswerRecord> Store::stream_results(UserId user, const std::string& run_id) const {
  std::vector<AnswerRecord> out;
  for_each_result(user, run_id, [&](const AnswerRecord& r) { out.push_back(r); });
  return out;
}

JobIdSet Store::answer_keys(UserId user, const std::string& run_id) const {
  std::lock_guard lock(impl_->sim_mutex);
  impl_->require_owner(user, run_id);
  Stmt s(*impl_->simulation, "SELECT agent_id, question_id FROM answers WHERE run_id = ?");
  s.bind(1, run_id);
  JobIdSet keys;
  while (s.step()) keys.insert({s.text(0), s.text(1)});
  return keys;
}

std::int64_t Store::answer_count(UserId user, const std::string& run_id) const {
  std::lock_guard lock(impl_->sim_mutex);
  impl_->require_owner(user, run_id);
  Stmt s(*impl_->simulation, "SELECT COUNT(*) FROM answers WHERE run_id = ?");
  s.bind(1, run_id);
  s.step();
  return s.i64(0);
}

void Store::save_manifest(UserId user, const RunManifest& manifest) {
  const std::string text = serialize_manifest(manifest);
  std::lock_guard lock(impl_->sim_mutex);
  impl_->require_owner(user, manifest.run_id);
  Stmt s(*impl_->simulation,
         "INSERT OR REPLACE INTO manifests (run_id, owner_id, content, updated_at_ms) VALUES (?, ?, ?, ?)");
  s.bind(1, manifest.run_id).bind(2, user).bind(3, text).bind(4, wall_ms());
  s.step();
}

std::optional<std::string> Store::manifest_text(UserId user, const std::string& run_id) const {
  std::lock_guard lock(impl_->sim_mutex);
  impl_->require_owner(user, run_id);
  Stmt s(*impl_->simulation, "SELECT content FROM manifests WHERE run_id = ?");
  s.bind(1, run_id);
  if (!s.step()) return std::nullopt;
  return s.text(0);
}

std::optional<RunManifest> Store::load_manifest(UserId user, const std::string& run_id) const {
  auto text = manifest_text(user, run_id);
  if (!text) return std::nullopt;
  return parse_manifest(*text);
}

PurgeReport Store::delete_user_data(UserId user) {
  std::lock_guard lock(impl_->sim_mutex);
  auto& db = *impl_->simulation;
  auto purge = [&](const char* sql) {
    Stmt s(db, sql);
    s.bind(1, user);
    s.step();
    return db.changes();
  };
  PurgeReport report;
  db.exec("BEGIN IMMEDIATE");
  try {
    report.answers = purge("DELETE FROM answers WHERE owner_id = ?");
    report.manifests = purge("DELETE FROM manifests WHERE owner_id = ?");
    report.populations = purge("DELETE FROM populations WHERE owner_id = ?");
    report.uploads = purge("DELETE FROM uploads WHERE owner_id = ?");
    report.runs = purge("DELETE FROM runs WHERE owner_id = ?");
    db.exec("COMMIT");
  } catch (...) {
    db.exec("ROLLBACK");
    throw;
  }
  // secure_delete zeroes the freed pages; folding the log back into the
  // main file keeps old page images from lingering there.
  if (impl_->file_backed) db.exec("PRAGMA wal_checkpoint(TRUNCATE)");
  return report;
}

UserScan Store::scan_user(UserId user) const {
  UserScan scan;
  {
    std::lock_guard lock(impl_->sim_mutex);
    auto& db = *impl_->simulation;
    std::vector<std::string> tables;
    {
      Stmt s(db, "SELECT name FROM sqlite_master WHERE type = 'table' AND name NOT LIKE 'sqlite_%' ORDER BY name");
      while (s.step()) tables.push_back(s.text(0));
    }
    for (const auto& table : tables) {
      bool keyed = false;
      {
        const std::string info = "PRAGMA table_info(\"" + table + "\")";
        Stmt s(db, info.c_str());
        while (s.step()) keyed = keyed || s.text(1) == "owner_id";
      }
      if (!keyed) {
        // Every simulation table is expected to carry its owner.
        scan.simulation_rows[table] = -1;
        continue;
      }
      const std::string count = "SELECT COUNT(*) FROM \"" + table + "\" WHERE owner_id = ?";
      Stmt s(db, count.c_str());
      s.bind(1, user);
      s.step();
      scan.simulation_rows[table] = s.i64(0);
    }
  }
  std::lock_guard lock(impl_->cred_mutex);
  Stmt s(*impl_->credentials, "SELECT COUNT(*) FROM users WHERE user_id = ?");
  s.bind(1, user);
  s.step();
  scan.credential_rows = s.i64(0);
  return scan;
}

}  // namespace surveysim

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "surveysim/jobs.hpp"
#include "surveysim/provider.hpp"

namespace surveysim {

/// One persisted answer. Only successfully parsed answers are stored; jobs
/// that ran out of attempts are reported through the run manifest.
struct AnswerRecord {
  std::string run_id;
  JobId job;
  std::size_t agent_index = 0;
  std::size_t question_index = 0;
  std::string value;
  std::optional<std::string> reasoning;
  std::string raw;
  TokenUsage usage;
  std::int64_t attempts = 0;
  std::int64_t repairs = 0;
  std::string status = "ok";
  std::string config_hash;
  std::string directive_version;
  std::int64_t created_at_ms = 0;

  bool operator==(const AnswerRecord&) const = default;
};

void to_json(nlohmann::json& j, const AnswerRecord& r);
void from_json(const nlohmann::json& j, AnswerRecord& r);

class AnswerSink {
 public:
  virtual ~AnswerSink() = default;
  /// Must be durable when it returns. Saving an existing key is a no-op.
  virtual void save(const AnswerRecord& record) = 0;
};

class MemoryAnswerSink final : public AnswerSink {
 public:
  void save(const AnswerRecord& record) override;
  [[nodiscard]] std::vector<AnswerRecord> records() const;
  [[nodiscard]] JobIdSet keys() const;
  [[nodiscard]] std::size_t size() const;
  /// Number of save() calls, including ignored duplicates.
  [[nodiscard]] std::size_t save_calls() const;

 private:
  mutable std::mutex mutex_;
  std::vector<AnswerRecord> records_;
  JobIdSet keys_;
  std::size_t calls_ = 0;
};

}  // namespace surveysim

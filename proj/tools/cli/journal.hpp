// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#pragma once

#include <filesystem>
#include <mutex>
#include <vector>

#include "surveysim/records.hpp"

namespace surveysim::cli {

/// Append-only answer log, one JSON object per line. Each save is flushed to
/// disk before returning. A torn final line left by a crash is cut off when
/// the journal is reopened.
class AnswerJournal final : public AnswerSink {
 public:
  explicit AnswerJournal(std::filesystem::path path);
  ~AnswerJournal() override;
  AnswerJournal(const AnswerJournal&) = delete;
  AnswerJournal& operator=(const AnswerJournal&) = delete;

  void save(const AnswerRecord& record) override;

  [[nodiscard]] std::vector<AnswerRecord> records() const;
  [[nodiscard]] JobIdSet keys() const;

 private:
  void load_existing();

  std::filesystem::path path_;
  int fd_ = -1;
  mutable std::mutex mutex_;
  std::vector<AnswerRecord> records_;
  JobIdSet keys_;
};

}  // namespace surveysim::cli

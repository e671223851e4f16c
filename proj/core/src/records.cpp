// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#include "surveysim/records.hpp"

namespace surveysim {

void to_json(nlohmann::json& j, const AnswerRecord& r) {
  j = nlohmann::json{{"run_id", r.run_id},
                     {"agent_id", r.job.agent_id},
                     {"question_id", r.job.question_id},
                     {"agent_index", r.agent_index},
                     {"question_index", r.question_index},
                     {"value", r.value},
                     {"reasoning", r.reasoning ? nlohmann::json(*r.reasoning) : nlohmann::json(nullptr)},
                     {"raw", r.raw},
                     {"input_tokens", r.usage.input_tokens},
                     {"output_tokens", r.usage.output_tokens},
                     {"attempts", r.attempts},
                     {"repairs", r.repairs},
                     {"status", r.status},
                     {"config_hash", r.config_hash},
                     {"directive_version", r.directive_version},
                     {"created_at_ms", r.created_at_ms}};
}

void from_json(const nlohmann::json& j, AnswerRecord& r) {
  r.run_id = j.value("run_id", "");
  r.job.agent_id = j.at("agent_id").get<std::string>();
  r.job.question_id = j.at("question_id").get<std::string>();
  r.agent_index = j.value("agent_index", std::size_t{0});
  r.question_index = j.value("question_index", std::size_t{0});
  r.value = j.at("value").get<std::string>();
  if (auto it = j.find("reasoning"); it != j.end() && it->is_string()) {
    r.reasoning = it->get<std::string>();
  } else {
    r.reasoning.reset();
  }
  r.raw = j.value("raw", "");
  r.usage.input_tokens = j.value("input_tokens", std::int64_t{0});
  r.usage.output_tokens = j.value("output_tokens", std::int64_t{0});
  r.attempts = j.value("attempts", std::int64_t{0});
  r.repairs = j.value("repairs", std::int64_t{0});
  r.status = j.value("status", "ok");
  r.config_hash = j.value("config_hash", "");
  r.directive_version = j.value("directive_version", "");
  r.created_at_ms = j.value("created_at_ms", std::int64_t{0});
}

void MemoryAnswerSink::save(const AnswerRecord& record) {
  std::lock_guard lock(mutex_);
  ++calls_;
  if (keys_.insert(record.job).second) records_.push_back(record);
}

std::vector<AnswerRecord> MemoryAnswerSink::records() const {
  std::lock_guard lock(mutex_);
  return records_;
}

JobIdSet MemoryAnswerSink::keys() const {
  std::lock_guard lock(mutex_);
  return keys_;
}

std::size_t MemoryAnswerSink::size() const {
  std::lock_guard lock(mutex_);
  return records_.size();
}

std::size_t MemoryAnswerSink::save_calls() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

}  // namespace surveysim

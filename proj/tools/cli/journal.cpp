// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#include "journal.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <string>

#include <nlohmann/json.hpp>

#include "common.hpp"
#include "surveysim/errors.hpp"

namespace surveysim::cli {

namespace {

[[noreturn]] void fail(const std::string& what, const std::filesystem::path& path) {
  throw Error(what + " " + path.string() + ": " + std::strerror(errno));
}

}  // namespace

AnswerJournal::AnswerJournal(std::filesystem::path path) : path_(std::move(path)) {
  if (std::filesystem::exists(path_)) load_existing();
  fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) fail("cannot open", path_);
}

AnswerJournal::~AnswerJournal() {
  if (fd_ >= 0) ::close(fd_);
}

void AnswerJournal::load_existing() {
  const std::string text = read_file(path_);
  std::size_t good_end = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) break;
    const std::string_view line(text.data() + pos, nl - pos);
    if (!line.empty()) {
      auto parsed = nlohmann::json::parse(line, nullptr, false);
      if (parsed.is_discarded()) break;
      auto record = parsed.get<AnswerRecord>();
      if (keys_.insert(record.job).second) records_.push_back(std::move(record));
    }
    pos = nl + 1;
    good_end = pos;
  }
  if (good_end < text.size()) std::filesystem::resize_file(path_, good_end);
}

void AnswerJournal::save(const AnswerRecord& record) {
  std::lock_guard lock(mutex_);
  if (keys_.count(record.job) != 0) return;
  nlohmann::json j = record;
  std::string line = j.dump();
  line.push_back('\n');
  std::size_t written = 0;
  while (written < line.size()) {
    const ssize_t n = ::write(fd_, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail("cannot append to", path_);
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd_) != 0) fail("cannot sync", path_);
  keys_.insert(record.job);
  records_.push_back(record);
}

std::vector<AnswerRecord> AnswerJournal::records() const {
  std::lock_guard lock(mutex_);
  return records_;
}

JobIdSet AnswerJournal::keys() const {
  std::lock_guard lock(mutex_);
  return keys_;
}

}  // namespace surveysim::cli

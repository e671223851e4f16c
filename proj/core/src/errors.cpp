// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#include "surveysim/errors.hpp"

namespace surveysim {

std::string ValidationReport::to_string() const {
  std::string out;
  for (const auto& issue : issues) {
    if (!out.empty()) out += '\n';
    out += issue.subject.empty() ? issue.message : issue.subject + ": " + issue.message;
  }
  return out;
}

namespace {

std::string join_entries(const std::vector<ParseError::Entry>& entries) {
  std::string out;
  for (const auto& e : entries) {
    if (!out.empty()) out += '\n';
    out += "row " + std::to_string(e.row) + ": " + e.message;
  }
  return out;
}

}  // namespace

ParseError::ParseError(std::vector<Entry> entries)
    : Error(join_entries(entries)), entries_(std::move(entries)) {}

}  // namespace surveysim

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace surveysim {

/// One failed check inside a ValidationReport. `subject` names the offending
/// attribute, constraint, field or row.
struct ValidationIssue {
  std::string subject;
  std::string message;

  bool operator==(const ValidationIssue&) const = default;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  [[nodiscard]] bool ok() const { return issues.empty(); }
  void add(std::string subject, std::string message) {
    issues.push_back({std::move(subject), std::move(message)});
  }
  void merge(const ValidationReport& other, const std::string& prefix = {}) {
    for (const auto& issue : other.issues) {
      issues.push_back({prefix + issue.subject, issue.message});
    }
  }
  [[nodiscard]] std::string to_string() const;
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(ValidationReport report)
      : Error(report.to_string()), report_(std::move(report)) {}
  [[nodiscard]] const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

class UnsatisfiableConstraints : public Error {
 public:
  using Error::Error;
};

class UnknownPlaceholder : public Error {
 public:
  explicit UnknownPlaceholder(std::string placeholder)
      : Error("unknown placeholder <" + placeholder + ">"), placeholder_(std::move(placeholder)) {}
  [[nodiscard]] const std::string& placeholder() const { return placeholder_; }

 private:
  std::string placeholder_;
};

/// Malformed input document. Every entry carries its 1-based row (or entry)
/// number so nothing is dropped silently.
class ParseError : public Error {
 public:
  struct Entry {
    std::size_t row;
    std::string message;
  };
  explicit ParseError(std::vector<Entry> entries);
  [[nodiscard]] const std::vector<Entry>& entries() const { return entries_; }

 private:
  std::vector<Entry> entries_;
};

class InfeasibleRequest : public Error {
 public:
  using Error::Error;
};

class ConfigMismatch : public Error {
 public:
  using Error::Error;
};

class AuthDenied : public Error {
 public:
  AuthDenied() : Error("authentication denied") {}
};

class AccessDenied : public Error {
 public:
  AccessDenied() : Error("access denied") {}
};

class NotFound : public Error {
 public:
  using Error::Error;
};

class StateConflict : public Error {
 public:
  using Error::Error;
};

class DuplicateLogin : public Error {
 public:
  DuplicateLogin() : Error("login name already registered") {}
};

}  // namespace surveysim

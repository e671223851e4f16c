// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#pragma once

#include <memory>
#include <string>

#include "surveysim/service.hpp"

namespace surveysim {

/// JSON-over-HTTP front end of a RunService.
///
///   POST   /auth/register          {"login", "secret"}
///   POST   /auth/login             {"login", "secret"} -> {"token"}
///   POST   /uploads                multipart: file, format
///   GET    /runs
///   POST   /runs                   {"config", "survey_upload_id", ...}
///   GET    /runs/{id}
///   POST   /runs/{id}/cancel
///   POST   /runs/{id}/resume
///   GET    /runs/{id}/metrics      text/event-stream of "snapshot" events
///   GET    /runs/{id}/results      ?format=csv|jsonl|manifest
///   DELETE /me/data
///
/// Everything except the /auth routes needs "Authorization: Bearer <token>".
/// Errors map to 401 (authentication), 403 (another user's data),
/// 404, 409 (state conflict or duplicate) and 422 (validation).
class HttpApi {
 public:
  explicit HttpApi(RunService& service);
  ~HttpApi();
  HttpApi(const HttpApi&) = delete;
  HttpApi& operator=(const HttpApi&) = delete;

  /// Binds and serves on a background thread. Port 0 picks a free port.
  /// Returns the bound port.
  int start(const std::string& host = "127.0.0.1", int port = 0);

  /// Serves on the calling thread until stop().
  bool listen(const std::string& host, int port);

  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace surveysim

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#pragma once

#include <atomic>
#include <functional>
#include <thread>

namespace surveysim::cli {

/// Blocks SIGINT and SIGTERM for the calling thread and every thread it
/// starts afterwards. Call first thing in main().
void block_termination_signals();

/// Waits for SIGINT or SIGTERM on a dedicated thread and runs `on_signal`
/// there for each one received.
class SignalWatcher {
 public:
  explicit SignalWatcher(std::function<void(int)> on_signal);
  ~SignalWatcher();
  SignalWatcher(const SignalWatcher&) = delete;
  SignalWatcher& operator=(const SignalWatcher&) = delete;

 private:
  std::function<void(int)> on_signal_;
  std::atomic<bool> stop_{false};
  std::thread thread_;
};

}  // namespace surveysim::cli

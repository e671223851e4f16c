// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#include <condition_variable>
#include <iostream>
#include <mutex>

#include "common.hpp"
#include "signals.hpp"
#include "surveysim/http_api.hpp"
#include "surveysim/service.hpp"
#include "surveysim/store.hpp"

namespace surveysim::cli {

ExitStatus cmd_serve(const ServeOptions& o) {
  std::filesystem::create_directories(o.data);
  StoreOptions store_options;
  store_options.directory = o.data;
  Store store(store_options);

  ServiceOptions service_options;
  service_options.store = &store;
  RunService service(service_options);
  HttpApi api(service);

  const int port = api.start(o.host, o.port);
  std::cout << "listening on http://" << o.host << ":" << port << std::endl;

  std::mutex mutex;
  std::condition_variable cv;
  bool stopping = false;
  {
    SignalWatcher watcher([&](int) {
      std::lock_guard lock(mutex);
      stopping = true;
      cv.notify_all();
    });
    std::unique_lock lock(mutex);
    cv.wait(lock, [&] { return stopping; });
  }
  std::cout << "shutting down" << std::endl;
  api.stop();
  return ExitStatus::ok;
}

}  // namespace surveysim::cli

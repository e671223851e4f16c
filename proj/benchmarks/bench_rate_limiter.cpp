// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#include <benchmark/benchmark.h>

#include <variant>

#include "surveysim/rate_limiter.hpp"

namespace {

using namespace surveysim;

// Steady stream of grants against a window that is kept full, so every call
// also has to expire old entries.
void BM_TryAcquireSaturated(benchmark::State& state) {
  const auto rpm = state.range(0);
  RateLimiter limiter(RateBudget{rpm, rpm * 1000});
  TimePoint now{};
  const Duration step = std::chrono::seconds(60) / rpm;
  std::int64_t granted = 0;
  for (auto _ : state) {
    auto r = limiter.try_acquire(now, 400);
    if (std::holds_alternative<RateLimiter::Grant>(r)) {
      ++granted;
    } else {
      now = std::get<TimePoint>(r);
    }
    now += step / 2;
  }
  state.counters["grant_ratio"] = benchmark::Counter(static_cast<double>(granted) / static_cast<double>(state.iterations()));
}
BENCHMARK(BM_TryAcquireSaturated)->Arg(60)->Arg(600)->Arg(6000);

void BM_Reconcile(benchmark::State& state) {
  RateLimiter limiter(RateBudget{1'000'000, 1'000'000'000});
  TimePoint now{};
  for (auto _ : state) {
    auto r = limiter.try_acquire(now, 300);
    limiter.reconcile(std::get<RateLimiter::Grant>(r).id, 350);
    now += std::chrono::milliseconds(1);
  }
}
BENCHMARK(BM_Reconcile);

}  // namespace

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#include <benchmark/benchmark.h>

// The packaged benchmark_main archive is built with a different LTO version
// than the system compiler, so the entry point lives here.
BENCHMARK_MAIN();

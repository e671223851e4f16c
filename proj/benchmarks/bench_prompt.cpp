// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#include <benchmark/benchmark.h>

#include <string>

#include "surveysim/prompt.hpp"

namespace {

using namespace surveysim;

void BM_ParseFencedReply(benchmark::State& state) {
  const auto schema = AnswerSchema::multi_choice({"newspaper", "television", "radio", "online"});
  const std::string reply =
      "Sure, here is my answer.\n```answer\nanswer: radio|online\nreasoning: I listen while driving and read "
      "the rest on my phone.\n```\nThanks for asking!";
  for (auto _ : state) {
    benchmark::DoNotOptimize(parse_response(reply, schema));
  }
}
BENCHMARK(BM_ParseFencedReply);

void BM_ParseMalformedReply(benchmark::State& state) {
  const auto schema = AnswerSchema::likert(1, 7);
  const std::string reply(static_cast<std::size_t>(state.range(0)), 'x');
  for (auto _ : state) {
    benchmark::DoNotOptimize(parse_response(reply, schema));
  }
  state.SetBytesProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ParseMalformedReply)->Arg(256)->Arg(4096);

void BM_EstimateTokens(benchmark::State& state) {
  std::string text;
  while (text.size() < 4096) text += "Grüße aus München, wie geht es dir heute? ";
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_tokens(text));
  }
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_EstimateTokens);

}  // namespace

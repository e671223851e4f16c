// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#include <benchmark/benchmark.h>

#include "surveysim/profile.hpp"

namespace {

using namespace surveysim;

ProfileSchema bench_schema(bool constrained) {
  ProfileSchema s;
  s.attributes.push_back({"gender", AttributeKind::categorical, {{"female", 0.5}, {"male", 0.45}, {"nonbinary", 0.05}}, 0, 0, ""});
  s.attributes.push_back({"region", AttributeKind::categorical, {{"north", 1}, {"south", 1}, {"east", 1}, {"west", 1}}, 0, 0, ""});
  s.attributes.push_back({"age", AttributeKind::integer_range, {}, 18, 90, "years"});
  s.attributes.push_back({"income", AttributeKind::real_range, {}, 0, 250000, "USD"});
  s.attributes.push_back({"personality", AttributeKind::big5, {}, 0, 0, ""});
  if (constrained) {
    Constraint forbid;
    forbid.kind = ConstraintKind::forbid;
    forbid.terms = {{"gender", std::string("male")}, {"region", std::string("west")}};
    s.constraints.push_back(forbid);
    Constraint boost;
    boost.kind = ConstraintKind::weight_multiplier;
    boost.terms = {{"gender", std::string("female")}, {"region", std::string("north")}};
    boost.factor = 3.0;
    s.constraints.push_back(boost);
  }
  return s;
}

void BM_GeneratePopulation(benchmark::State& state) {
  const auto schema = bench_schema(state.range(1) != 0);
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate_population(schema, n, 2026));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GeneratePopulation)->Args({1000, 0})->Args({1000, 1})->Args({10000, 1});

void BM_PopulationCsvRoundTrip(benchmark::State& state) {
  const auto schema = bench_schema(true);
  const auto population = generate_population(schema, 1000, 9);
  for (auto _ : state) {
    const auto text = population_to_csv(population, schema);
    benchmark::DoNotOptimize(population_from_csv(text, schema));
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_PopulationCsvRoundTrip);

}  // namespace

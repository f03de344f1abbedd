// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 gatekeeper contributors

#include <benchmark/benchmark.h>

#include "gatekeeper/text.hpp"

static void BM_Tokenize(benchmark::State& state) {
    const std::string text =
        "Fetches the current weather conditions for a given city and returns "
        "temperature, humidity and wind speed as a JSON object.";
    for (auto _ : state) {
        benchmark::DoNotOptimize(gatekeeper::text::tokenize(text));
    }
}
BENCHMARK(BM_Tokenize);

BENCHMARK_MAIN();

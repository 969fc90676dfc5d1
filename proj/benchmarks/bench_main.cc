// Copyright 2025 The infodec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include <random>

#include "infodec/builders.h"
#include "infodec/dem.h"
#include "infodec/matcher.h"
#include "infodec/sim.h"

using namespace infodec;

namespace {

ExperimentSpec spec_of(int d, CircuitKind c, Scheme s, double p) {
    ExperimentSpec e;
    e.d = d;
    e.circuit = c;
    e.scheme = s;
    e.noisy_rounds = 20 * d;
    e.p = p;
    return e;
}

// arg 0: d, arg 1: scheme index (0 standard/areal, 1 standard/rowcolumn,
// 2 3cx/areal, 3 3cx/boundary)
ExperimentSpec from_args(const benchmark::State &st, double p) {
    static const std::pair<CircuitKind, Scheme> pairs[] = {{CircuitKind::Standard, Scheme::Areal},
                                                          {CircuitKind::Standard, Scheme::RowColumn},
                                                          {CircuitKind::ThreeCX, Scheme::Areal},
                                                          {CircuitKind::ThreeCX, Scheme::Boundary}};
    auto [c, s] = pairs[st.range(1)];
    return spec_of(static_cast<int>(st.range(0)), c, s, p);
}

void BM_FrameSample(benchmark::State &st) {
    auto e = build_memory_experiment(from_args(st, 5e-3));
    uint64_t seed = 0;
    for (auto _ : st) {
        auto b = frame_sample(e.circuit, 1024, seed++);
        benchmark::DoNotOptimize(b.det_bits.data());
    }
    st.SetItemsProcessed(st.iterations() * 1024);
}
BENCHMARK(BM_FrameSample)->ArgsProduct({{3, 5, 7}, {0, 3}})->Unit(benchmark::kMillisecond);

void BM_Decode(benchmark::State &st) {
    auto e = build_memory_experiment(from_args(st, 5e-3));
    auto g = build_matching_graph(e.circuit);
    auto batch = frame_sample(e.circuit, 512, 7);
    Decoder dec(g);
    size_t s = 0;
    for (auto _ : st) {
        benchmark::DoNotOptimize(dec.predict(batch.fired(s)));
        s = (s + 1) % batch.num_shots;
    }
    st.SetItemsProcessed(st.iterations());
}
BENCHMARK(BM_Decode)->ArgsProduct({{3, 5, 7}, {0, 1, 2, 3}})->Unit(benchmark::kMicrosecond);

void BM_ExtractDem(benchmark::State &st) {
    auto e = build_memory_experiment(from_args(st, 1e-3));
    for (auto _ : st) {
        auto dem = extract_dem(e.circuit);
        benchmark::DoNotOptimize(dem.mechanisms.data());
    }
}
BENCHMARK(BM_ExtractDem)->ArgsProduct({{3, 5}, {0, 3}})->Unit(benchmark::kMillisecond);

void BM_Blossom(benchmark::State &st) {
    std::mt19937_64 rng(5);
    uint32_t n = static_cast<uint32_t>(st.range(0));
    std::vector<WeightedEdge> edges;
    for (uint32_t u = 0; u < n; u++) {
        for (uint32_t v = u + 1; v < n; v++) edges.push_back({u, v, static_cast<int64_t>(rng() % 100000)});
    }
    for (auto _ : st) benchmark::DoNotOptimize(max_weight_matching(n, edges, true));
}
BENCHMARK(BM_Blossom)->Arg(16)->Arg(64)->Arg(128)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();

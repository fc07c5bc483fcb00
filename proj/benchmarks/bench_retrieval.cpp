// Copyright (C) 2026 hyptax authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <vector>

#include "hyptax/evaluator.hpp"
#include "hyptax/manifold.hpp"
#include "hyptax/rng.hpp"

using namespace hyptax;
using manifold::LorentzPoint;
using manifold::ManifoldConfig;

namespace {

std::vector<LorentzPoint> random_points(int n, int dim, std::uint64_t seed) {
    const ManifoldConfig cfg;
    Rng rng(seed);
    std::vector<LorentzPoint> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        manifold::TangentVector v;
        v.space = rng.gaussians(dim);
        out.push_back(manifold::exp_map_origin(v, cfg));
    }
    return out;
}

}  // namespace

static void BM_NearestKey(benchmark::State& state) {
    const ManifoldConfig cfg;
    const auto queries = random_points(64, 64, 1);
    const auto keys = random_points(static_cast<int>(state.range(0)), 64, 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(eval::nearest_key_indices(queries, keys, cfg));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_NearestKey)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

static void BM_NearestKeyThreaded(benchmark::State& state) {
    const ManifoldConfig cfg;
    const auto queries = random_points(256, 64, 3);
    const auto keys = random_points(2048, 64, 4);
    for (auto _ : state) {
        benchmark::DoNotOptimize(eval::nearest_key_indices(
            queries, keys, cfg, nullptr, static_cast<int>(state.range(0))));
    }
}
BENCHMARK(BM_NearestKeyThreaded)->Arg(1)->Arg(2)->Arg(4);

BENCHMARK_MAIN();

// Copyright (C) 2026 hyptax authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <vector>

#include "hyptax/manifold.hpp"
#include "hyptax/rng.hpp"

using namespace hyptax;
using manifold::LorentzPoint;
using manifold::ManifoldConfig;
using manifold::TangentVector;

namespace {

std::vector<TangentVector> random_tangents(int n, int dim, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<TangentVector> out(n);
    for (auto& v : out) v.space = rng.gaussians(dim);
    return out;
}

}  // namespace

static void BM_ExpMapOrigin(benchmark::State& state) {
    const ManifoldConfig cfg;
    const auto tangents = random_tangents(256, static_cast<int>(state.range(0)), 1);
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(manifold::exp_map_origin(tangents[i % tangents.size()], cfg));
        ++i;
    }
}
BENCHMARK(BM_ExpMapOrigin)->Arg(16)->Arg(64)->Arg(256);

static void BM_GeodesicDistance(benchmark::State& state) {
    const ManifoldConfig cfg;
    const auto tangents = random_tangents(256, static_cast<int>(state.range(0)), 2);
    std::vector<LorentzPoint> points;
    for (const auto& v : tangents) points.push_back(manifold::exp_map_origin(v, cfg));
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(manifold::geodesic_distance(
            points[i % points.size()], points[(i + 7) % points.size()], cfg));
        ++i;
    }
}
BENCHMARK(BM_GeodesicDistance)->Arg(16)->Arg(64)->Arg(256);

static void BM_ExteriorAngle(benchmark::State& state) {
    const ManifoldConfig cfg;
    const auto tangents = random_tangents(256, static_cast<int>(state.range(0)), 3);
    std::vector<LorentzPoint> points;
    for (const auto& v : tangents) points.push_back(manifold::exp_map_origin(v, cfg));
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(manifold::exterior_angle(
            points[i % points.size()], points[(i + 11) % points.size()], cfg));
        ++i;
    }
}
BENCHMARK(BM_ExteriorAngle)->Arg(16)->Arg(64)->Arg(256);

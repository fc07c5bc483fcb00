// Copyright (C) 2026 hyptax authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <map>
#include <string>
#include <vector>

#include "hyptax/dataset.hpp"
#include "hyptax/losses.hpp"
#include "hyptax/trainer.hpp"

using namespace hyptax;
using autodiff::Graph;
using autodiff::Var;

namespace {

struct BenchSetup {
    data::Dataset ds;
    std::vector<int> batch;
    data::BatchMeta meta;
    train::TrainConfig cfg;
    train::ParamSet params;
};

BenchSetup make_setup(int batch_size) {
    BenchSetup s;
    data::SynthSpec spec;
    spec.branching = {4, 3, 3, 3};
    spec.specimens_per_species = 4;
    spec.d_in = 32;
    spec.seed = 5;
    spec.unseen_fraction = 0.0;
    s.ds = data::generate_synthetic(spec);
    for (int i = 0; i < batch_size; ++i) s.batch.push_back(i);
    s.meta = data::build_batch_meta(s.ds.records, s.batch, s.ds.taxonomy);
    s.cfg.d_in = 32;
    s.cfg.d = 64;
    s.params = train::init_params(s.cfg);
    return s;
}

}  // namespace

static void BM_TotalLossForwardBackward(benchmark::State& state) {
    BenchSetup s = make_setup(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        Graph g;
        std::map<std::string, Var> vars;
        for (const auto& [name, tensor] : s.params.tensors) {
            vars.emplace(name, g.leaf(tensor));
        }
        losses::EncodedBatch emb =
            train::encode_batch(g, vars, s.ds.records, s.batch, s.cfg);
        losses::TotalLoss loss =
            losses::total_loss(emb, s.meta, vars.at("log_temp"), s.cfg.loss);
        g.backward(loss.total);
        benchmark::DoNotOptimize(g.grad(vars.at("img.w")));
    }
}
BENCHMARK(BM_TotalLossForwardBackward)->Arg(16)->Arg(64)->Arg(128);

static void BM_ContrastiveOnly(benchmark::State& state) {
    BenchSetup s = make_setup(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        Graph g;
        std::map<std::string, Var> vars;
        for (const auto& [name, tensor] : s.params.tensors) {
            vars.emplace(name, g.leaf(tensor));
        }
        losses::EncodedBatch emb =
            train::encode_batch(g, vars, s.ds.records, s.batch, s.cfg);
        Var loss = losses::contrastive_loss(emb.image, emb.dna, vars.at("log_temp"),
                                            s.cfg.loss.manifold);
        g.backward(loss);
        benchmark::DoNotOptimize(g.grad(vars.at("img.w")));
    }
}
BENCHMARK(BM_ContrastiveOnly)->Arg(16)->Arg(64)->Arg(128);

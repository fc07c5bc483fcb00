// Copyright (C) 2026 hyptax authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hyptax/autodiff.hpp"
#include "hyptax/dataset.hpp"
#include "hyptax/losses.hpp"

namespace hyptax::train {

using autodiff::Tensor;
using autodiff::Var;

struct TrainConfig {
    int epochs = 50;
    int batch_size = 128;
    double lr_min = 1e-6;
    double lr_max = 5e-5;
    double beta1 = 0.9;
    double beta2 = 0.98;
    double adam_eps = 1e-8;
    double weight_decay = 1e-4;
    double warmup_fraction = 0.3;
    std::uint64_t seed = 42;
    int d_in = 32;        // feature / featurizer width
    int d = 64;           // embedding dimension before the time coordinate
    bool use_hidden = false;
    int hidden_dim = 64;
    losses::LossConfig loss;

    void validate() const;
};

/// Named trainable tensors: per-modality affine maps (optionally one hidden
/// relu layer) plus the shared log-temperature. std::map keeps iteration
/// order stable for checkpoints and the optimizer.
struct ParamSet {
    std::map<std::string, Tensor> tensors;

    Tensor& at(const std::string& name);
    const Tensor& at(const std::string& name) const;
};

/// Gaussian init scaled by 1/sqrt(fan_in); log_temp starts at
/// log(init_temperature). Deterministic in cfg.seed.
ParamSet init_params(const TrainConfig& cfg);

/// Hashing bag-of-tokens featurizer: whitespace tokens FNV-1a-hashed into
/// d_in buckets, counts l2-normalized. The empty string maps to the zero
/// vector. Stand-in text frontend for the label encoder.
std::vector<double> featurize_text(const std::string& text, int d_in);

/// Differentiable batch encoding: affine map per modality followed by the
/// exponential map at the origin. Rank labels are featurized from the
/// ancestor-path string of that rank; rows for missing ranks are placeholders
/// that the loss masks out. Throws std::invalid_argument on feature width
/// mismatch.
losses::EncodedBatch encode_batch(autodiff::Graph& g,
                                  const std::map<std::string, Var>& params,
                                  const std::vector<data::SpecimenRecord>& records,
                                  const std::vector<int>& batch,
                                  const TrainConfig& cfg);

/// Pure-double encoding of whole records (evaluation path); matches the graph
/// encoding values exactly.
std::vector<losses::SpecimenEmbeddings> encode_records(
    const std::vector<data::SpecimenRecord>& records, const ParamSet& params,
    const TrainConfig& cfg);

/// Pure-double encoding of one text string through the text encoder.
manifold::LorentzPoint encode_text(const std::string& text, const ParamSet& params,
                                   const TrainConfig& cfg);

/// Hyperbolic embeddings of every taxonomy class, per rank, through the text
/// encoder (for cone diagnostics).
std::array<std::vector<manifold::LorentzPoint>, data::kNumRanks> encode_label_table(
    const data::TaxonomyIndex& taxonomy, const ParamSet& params,
    const TrainConfig& cfg);

/// One-cycle schedule: cosine rise lr_min -> lr_max over
/// floor(warmup_fraction * total_steps) steps, then cosine decay back to
/// lr_min at the final step. Throws std::invalid_argument when step is
/// outside [0, total_steps).
double one_cycle_lr(long step, long total_steps, const TrainConfig& cfg);

struct AdamState {
    std::map<std::string, Tensor> m;
    std::map<std::string, Tensor> v;
    long t = 0;
};

struct StepRecord {
    int epoch = 0;
    long step = 0;
    double lr = 0.0;
    double total = 0.0;
    std::vector<std::pair<std::string, double>> components;
    double temperature = 0.0;
};

/// Forward + backward + Adam update (decoupled weight decay on encoder
/// parameters, none on log_temp). Throws NumericError with the component
/// breakdown when the loss is non-finite.
StepRecord train_step(const std::vector<data::SpecimenRecord>& records,
                      const std::vector<int>& batch,
                      const data::TaxonomyIndex& taxonomy, ParamSet& params,
                      AdamState& opt, long step, long total_steps,
                      const TrainConfig& cfg);

struct Checkpoint {
    int format_version = 1;
    TrainConfig config;
    ParamSet params;
    AdamState opt;
    std::uint64_t rng_state = 0;
    int epoch = 0;  // completed epochs
    long step = 0;  // completed optimizer steps
};

struct EpochRecord {
    int epoch = 0;
    double mean_loss = 0.0;
    /// Species-level DNA-to-DNA macro accuracy on the val split (train_seen
    /// keys); absent when the dataset has no val records.
    std::optional<double> val_species_macro;
};

using StepCallback = std::function<void(const StepRecord&)>;
using EpochCallback = std::function<void(const EpochRecord&)>;

/// Runs the epoch loop over the train_seen split. Resuming from a checkpoint
/// at epoch k reproduces the uninterrupted trajectory exactly; stop_after_epoch
/// (when >= 0) interrupts the run after that epoch completes, keeping the
/// full-horizon LR schedule. Throws std::invalid_argument when train_seen is
/// empty.
Checkpoint train(const data::Dataset& dataset, const TrainConfig& cfg,
                 const Checkpoint* resume = nullptr, const StepCallback& on_step = {},
                 const EpochCallback& on_epoch = {}, int stop_after_epoch = -1);

/// Binary checkpoint: magic line, little-endian u64 JSON-header length, JSON
/// header (format version, config, epoch/step counters, RNG state, array
/// directory), then the named arrays as little-endian IEEE-754 doubles in
/// directory order. Round-trips bit-exactly.
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace hyptax::train

// Copyright (C) 2026 hyptax authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "hyptax/dataset.hpp"
#include "hyptax/losses.hpp"
#include "hyptax/manifold.hpp"

namespace hyptax::eval {

using manifold::LorentzPoint;
using manifold::ManifoldConfig;

enum class Modality { image, dna };

struct RetrievalTask {
    Modality query;
    Modality key;
    std::string name;
};

/// DNA-to-DNA, Image-to-Image, Image-to-DNA.
const std::vector<RetrievalTask>& retrieval_tasks();

/// Index of the nearest key per query under geodesic distance; ties go to the
/// lowest key index. self_key_of_query, when given, maps each query to a key
/// index to exclude (same-embedding-table retrieval). Throws
/// std::invalid_argument on an empty key set.
std::vector<int> nearest_key_indices(const std::vector<LorentzPoint>& queries,
                                     const std::vector<LorentzPoint>& keys,
                                     const ManifoldConfig& mcfg,
                                     const std::vector<int>* self_key_of_query = nullptr,
                                     int threads = 1);

/// Label of the nearest key per query.
std::vector<std::string> retrieve_top1(const std::vector<LorentzPoint>& queries,
                                       const std::vector<LorentzPoint>& keys,
                                       const std::vector<std::string>& key_labels,
                                       const ManifoldConfig& mcfg,
                                       const std::vector<int>* self_key_of_query = nullptr,
                                       int threads = 1);

/// Class-averaged top-1 accuracy over the classes present in the query set;
/// classes with zero queries are excluded.
double accuracy_macro(const std::vector<std::string>& preds,
                      const std::vector<std::string>& truths,
                      const std::unordered_set<std::string>& classes);

/// Instance-averaged top-1 accuracy. Throws std::invalid_argument when empty.
double accuracy_micro(const std::vector<std::string>& preds,
                      const std::vector<std::string>& truths);

/// 2ab/(a+b); defined as 0 when both inputs are 0.
double harmonic_mean(double seen, double unseen);

struct EvalCell {
    std::optional<double> macro;
    std::optional<double> micro;
};

struct EvalEntry {
    EvalCell seen;
    EvalCell unseen;
    EvalCell hm;
};

/// Per-rank x per-task x seen/unseen/H.M. x macro/micro accuracy table.
struct EvalReport {
    /// table[rank][task name]
    std::array<std::map<std::string, EvalEntry>, data::kNumRanks> table;

    /// JSON document keyed rank.task.{seen,unseen,hm}.{macro,micro}; values
    /// rounded to 6 fractional digits, null for undefined cells.
    std::string to_json() const;
    /// CSV flattening, one row per rank x task.
    std::string to_csv() const;
};

struct EvalOptions {
    int threads = 1;
    ManifoldConfig manifold;
};

/// Runs the full retrieval protocol: queries are test_seen plus test_unseen,
/// keys are train_seen plus the dedicated key split; all three tasks at all
/// four ranks, macro and micro over the seen and unseen query subsets (a
/// query is unseen at rank r iff its rank-r class has no train_seen
/// occurrence), with harmonic means filled in. `embeddings` is parallel to
/// dataset.records. Throws DataError when a required split is missing.
EvalReport evaluate_all(const data::Dataset& dataset,
                        const std::vector<losses::SpecimenEmbeddings>& embeddings,
                        const EvalOptions& options = {});

}  // namespace hyptax::eval

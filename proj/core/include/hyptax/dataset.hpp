// Copyright (C) 2026 hyptax authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace hyptax::data {

inline constexpr int kNumRanks = 4;  // order, family, genus, species
extern const std::array<std::string, kNumRanks> kRankNames;

enum class Split { train_seen, val, test_seen, test_unseen, key };
Split parse_split(const std::string& s);
const std::string& split_name(Split s);

/// One specimen: per-modality feature vectors plus its (possibly partial)
/// ranked labels and split tag.
struct SpecimenRecord {
    std::string id;
    Split split = Split::train_seen;
    std::array<std::optional<std::string>, kNumRanks> labels;
    std::vector<double> img_feat;
    std::vector<double> dna_feat;

    bool has_rank(int r) const { return labels[r].has_value(); }
    /// Deepest available rank index, or -1 when all labels are missing.
    int deepest_rank() const;
    /// Class key at rank r: '/'-joined available ancestor labels up to r.
    /// Empty string when rank r itself is missing.
    std::string class_key(int r) const;
    /// Space-joined available ancestor labels up to rank r (text-encoder input).
    std::string path_text(int r) const;
};

/// Per-rank class vocabularies (path-keyed), child-to-parent maps, and the
/// seen-species set.
struct TaxonomyIndex {
    std::array<std::vector<std::string>, kNumRanks> classes;  // id -> path key
    /// id -> space-joined ancestor labels (text-encoder input for the class)
    std::array<std::vector<std::string>, kNumRanks> class_text;
    std::array<std::unordered_map<std::string, int>, kNumRanks> class_id;
    /// parent_of[r][id] = class id at rank r-1 (or -1); parent_of[0] is all -1.
    std::array<std::vector<int>, kNumRanks> parent_of;
    std::unordered_set<std::string> seen_species;  // species keys in train_seen

    int id_at(int rank, const std::string& key) const;
};

struct Dataset {
    std::vector<SpecimenRecord> records;
    TaxonomyIndex taxonomy;
};

TaxonomyIndex build_taxonomy(const std::vector<SpecimenRecord>& records);

/// Parses the tab-separated specimen table. Schema (header row required):
///   id  split  order  family  genus  species  img_feat  dna_feat
/// Features are ';'-separated decimal literals; an empty label cell means the
/// rank is missing. Throws DataError with a line number on malformed floats,
/// duplicate ids, or a child label mapping to two different parent labels.
Dataset load_tsv(const std::string& path);

void write_tsv(const std::string& path, const std::vector<SpecimenRecord>& records);

/// Shape of a synthetic hierarchical dataset.
struct SynthSpec {
    std::vector<int> branching = {5, 4, 3, 3};  // children per rank, root first
    int specimens_per_species = 20;
    int d_in = 32;
    double noise_sigma = 0.05;
    double unseen_fraction = 0.25;
    std::uint64_t seed = 1;

    void validate() const;
    int species_count() const;
};

/// Samples a labelled feature dataset over a random taxonomy tree: one
/// Gaussian prototype per tree node (child = parent + per-rank-scaled offset),
/// specimen features = species prototype + isotropic noise pushed through a
/// per-modality random linear map. Unseen species occur only in the
/// test_unseen and key splits. Deterministic in the given SynthSpec.
Dataset generate_synthetic(const SynthSpec& spec);

/// Space-joined concatenation of the available rank labels, root to leaf.
/// Missing middle ranks are skipped. Throws std::invalid_argument when no
/// label is present.
std::string build_full_text_key(const std::array<std::optional<std::string>, kNumRanks>& labels);

/// Epoch-deterministic shuffled batches of record indices; the final short
/// batch is kept. Throws std::invalid_argument when batch_size < 2.
std::vector<std::vector<int>> make_batches(std::size_t record_count, int batch_size,
                                           std::uint64_t seed, int epoch);

/// Class metadata for one batch, fed to the taxonomy-aware pair builders.
/// Ids below zero mean "rank unavailable".
struct BatchMeta {
    int batch_size = 0;
    /// rank_class[r][i]: class id of specimen i at rank r, or -1.
    std::array<std::vector<int>, kNumRanks> rank_class;
    /// Interned id of the deepest available class (rank-qualified), or -1.
    std::vector<int> deepest_class;
    std::vector<int> deepest_rank;  // -1 when the specimen has no labels
};

BatchMeta build_batch_meta(const std::vector<SpecimenRecord>& records,
                           const std::vector<int>& batch,
                           const TaxonomyIndex& taxonomy);

/// Seen/unseen class keys at a rank: a class is seen iff at least one
/// train_seen specimen carries it; unseen = test-occurring classes not seen.
std::pair<std::unordered_set<std::string>, std::unordered_set<std::string>>
split_seen_unseen(const std::vector<SpecimenRecord>& records, int rank);

}  // namespace hyptax::data

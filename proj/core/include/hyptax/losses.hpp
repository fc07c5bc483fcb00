// Copyright (C) 2026 hyptax authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hyptax/autodiff.hpp"
#include "hyptax/dataset.hpp"
#include "hyptax/manifold.hpp"

namespace hyptax::losses {

using autodiff::Var;
using manifold::LorentzPoint;
using manifold::ManifoldConfig;

enum class Polarity { positive, negative };

/// Polarity configuration of the entailment objective: none, positive-only,
/// or positive plus margin-separated negatives.
enum class ElMode { none, pos, pos_neg };

ElMode parse_el_mode(const std::string& s);
const std::string& el_mode_name(ElMode m);

/// Switches and constants selecting one training objective.
///
/// use_el enables single-level entailment at the deepest label (text as the
/// parent of image and, when el_apply_dna, of DNA); use_sel enables the
/// stacked objective (intra-rank chain plus inter-modal nesting). They are
/// mutually exclusive. The temperature is optimized as log-temperature so it
/// stays positive; init_temperature seeds it.
struct LossConfig {
    double margin = 0.1;
    double init_temperature = 0.07;
    ElMode el_mode = ElMode::pos_neg;
    bool use_cl = true;
    bool use_el = false;
    bool use_sel = true;
    bool use_full_text = false;
    bool use_image_dna_contrastive = true;  // include the image-DNA pair in CL
    bool cl_text_pairs = true;              // include image-text / dna-text pairs in CL
    bool el_apply_dna = true;               // single-level EL also nests DNA under text
    double weight_cl = 1.0;
    double weight_sel = 1.0;
    ManifoldConfig manifold;

    /// Throws std::invalid_argument on contradictory switch combinations.
    void validate() const;
};

/// Positive and negative index pairs over one batch, by class equality.
struct PairSets {
    std::vector<std::pair<int, int>> positives;  // c_i == c_j (diagonal included)
    std::vector<std::pair<int, int>> negatives;  // c_i != c_j
};

/// Builds the pair sets from per-item class ids; items with id < 0 are
/// excluded from both sets.
PairSets make_pair_sets(const std::vector<int>& classes);

// ---------------------------------------------------------------------------
// scalar (pure double) API
// ---------------------------------------------------------------------------

/// Hinge of Eq.-style entailment terms:
///   positive: max(0, ext - aper)
///   negative: max(0, aper - ext + margin)
double entailment_hinge(double ext, double aper, double margin, Polarity polarity);

/// Pair loss with the cone at the parent. Throws std::invalid_argument when
/// the parent sits at the origin.
double entailment_pair_loss(const LorentzPoint& parent, const LorentzPoint& child,
                            const LossConfig& cfg, Polarity polarity);

/// Hyperbolic embeddings of one specimen's taxonomy, rank-indexed.
struct RankedLabelEmbeddings {
    std::array<std::optional<LorentzPoint>, data::kNumRanks> by_rank;

    bool available(int r) const { return by_rank[r].has_value(); }
    /// Deepest available rank, or -1.
    int deepest_rank() const;
};

/// All hyperbolic embeddings of one specimen (pure-double view, used by the
/// evaluator and diagnostics; training uses the batched graph form).
struct SpecimenEmbeddings {
    LorentzPoint image;
    LorentzPoint dna;
    RankedLabelEmbeddings ranks;
    std::optional<LorentzPoint> full_text;
};

// ---------------------------------------------------------------------------
// batched differentiable API
// ---------------------------------------------------------------------------

/// Batch of points on the hyperboloid: time is b x 1, space is b x d.
struct LorentzBatch {
    Var time;
    Var space;

    int size() const { return autodiff::forward(time).rows; }
};

/// Differentiable embeddings of a whole batch. text_rank[r] rows for
/// specimens missing rank r are placeholders and must be masked out through
/// the pair sets; text_deepest always exists for labelled specimens.
struct EncodedBatch {
    LorentzBatch image;
    LorentzBatch dna;
    std::array<LorentzBatch, data::kNumRanks> text_rank;
    LorentzBatch text_deepest;
    std::optional<LorentzBatch> text_full;
};

/// Pairwise Lorentzian inner products, |a| x |b|.
Var pairwise_lorentz_inner(const LorentzBatch& a, const LorentzBatch& b);

/// Pairwise geodesic distances acosh(max(-c<x,y>, 1))/sqrt(c).
Var pairwise_geodesic_distance(const LorentzBatch& a, const LorentzBatch& b,
                               const ManifoldConfig& mcfg);

/// Pairwise exterior angles ext(parent_i, child_j).
Var pairwise_exterior_angle(const LorentzBatch& parent, const LorentzBatch& child,
                            const ManifoldConfig& mcfg);

/// Column of cone half-apertures aper(parent_i), b x 1.
Var half_aperture_column(const LorentzBatch& parent, const ManifoldConfig& mcfg);

/// Batched entailment loss over the given pair sets:
///   pos-only:  mean over P of the positive hinge
///   pos+neg:   1/2 (mean over P + mean over N), with an empty N contributing 0
/// Throws std::invalid_argument when P is empty or el_mode is none.
Var entailment_loss(const LorentzBatch& parent, const LorentzBatch& child,
                    const PairSets& pairs, const LossConfig& cfg);

/// Convenience overload building pair sets from class ids.
Var entailment_loss(const LorentzBatch& parent, const LorentzBatch& child,
                    const std::vector<int>& classes, const LossConfig& cfg);

/// Intra-modal stacked entailment: availability-weighted mean over consecutive
/// rank levels of the entailment loss with rank r-1 as parent of rank r.
/// Negatives at a level are batch items whose rank-(r-1) class differs.
/// Levels with no valid specimen contribute to neither numerator nor
/// denominator; returns 0 when no level is available.
Var sel_intra(const EncodedBatch& emb, const data::BatchMeta& meta,
              const LossConfig& cfg);

/// Inter-modal stacked entailment: unweighted mean of text->image,
/// text->DNA and DNA->image entailment at the deepest available label.
/// Throws std::invalid_argument when a specimen has no taxonomic label.
Var sel_inter(const EncodedBatch& emb, const data::BatchMeta& meta,
              const LossConfig& cfg);

/// Symmetric InfoNCE over in-batch pairs with logits -d_H(a_i, b_j) / tau
/// and the diagonal as targets; tau = exp(log_temp).
Var contrastive_loss(const LorentzBatch& a, const LorentzBatch& b, Var log_temp,
                     const ManifoldConfig& mcfg);

/// Weighted component values of one total-loss evaluation; the recorded
/// components sum exactly to the total.
struct TotalLoss {
    Var total;
    std::vector<std::pair<std::string, double>> components;

    double component(const std::string& name) const;
    bool has_component(const std::string& name) const;
};

/// Assembles the configured objective:
///   contrastive: weight_cl * mean of the enabled modality-pair CL terms
///   entailment (use_el): weight_sel * single-level entailment at the
///     deepest label
///   sel_intra / sel_inter (use_sel): weight_sel * each stacked component
TotalLoss total_loss(const EncodedBatch& emb, const data::BatchMeta& meta,
                     Var log_temp, const LossConfig& cfg);

// ---------------------------------------------------------------------------
// diagnostics
// ---------------------------------------------------------------------------

/// Fraction of taxonomy edges (parent class, child class) whose child label
/// embedding falls outside the parent's entailment cone.
/// `label_points[r][class_id]` holds the embedding of each rank-r class.
double cone_violation_rate(
    const std::array<std::vector<LorentzPoint>, data::kNumRanks>& label_points,
    const data::TaxonomyIndex& taxonomy, const ManifoldConfig& mcfg);

}  // namespace hyptax::losses

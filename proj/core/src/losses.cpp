// Copyright (C) 2026 hyptax authors
// SPDX-License-Identifier: Apache-2.0

#include "hyptax/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hyptax::losses {

using autodiff::Graph;
using autodiff::Tensor;
namespace ad = autodiff;

ElMode parse_el_mode(const std::string& s) {
    if (s == "none") return ElMode::none;
    if (s == "pos") return ElMode::pos;
    if (s == "pos_neg") return ElMode::pos_neg;
    throw std::invalid_argument("unknown el_mode '" + s + "'");
}

const std::string& el_mode_name(ElMode m) {
    static const std::string names[] = {"none", "pos", "pos_neg"};
    return names[static_cast<int>(m)];
}

void LossConfig::validate() const {
    manifold.validate();
    if (!(margin >= 0.0) || !std::isfinite(margin)) {
        throw std::invalid_argument("LossConfig: margin must be finite and >= 0");
    }
    if (!(init_temperature > 0.0)) {
        throw std::invalid_argument("LossConfig: init_temperature must be > 0");
    }
    if (!(weight_cl >= 0.0) || !(weight_sel >= 0.0) || !std::isfinite(weight_cl) ||
        !std::isfinite(weight_sel)) {
        throw std::invalid_argument("LossConfig: loss weights must be finite and >= 0");
    }
    if (use_el && use_sel) {
        throw std::invalid_argument(
            "LossConfig: single-level entailment and stacked entailment are mutually "
            "exclusive");
    }
    if ((use_el || use_sel) && el_mode == ElMode::none) {
        throw std::invalid_argument(
            "LossConfig: entailment enabled but el_mode is 'none'");
    }
    if (!use_cl && !use_el && !use_sel) {
        throw std::invalid_argument("LossConfig: no objective enabled");
    }
    if (use_cl && !use_image_dna_contrastive && !cl_text_pairs && !use_full_text) {
        throw std::invalid_argument(
            "LossConfig: contrastive enabled but every modality pair is disabled");
    }
}

PairSets make_pair_sets(const std::vector<int>& classes) {
    PairSets sets;
    const int n = static_cast<int>(classes.size());
    for (int i = 0; i < n; ++i) {
        if (classes[i] < 0) continue;
        for (int j = 0; j < n; ++j) {
            if (classes[j] < 0) continue;
            if (classes[i] == classes[j]) {
                sets.positives.emplace_back(i, j);
            } else {
                sets.negatives.emplace_back(i, j);
            }
        }
    }
    return sets;
}

double entailment_hinge(double ext, double aper, double margin, Polarity polarity) {
    if (polarity == Polarity::positive) return std::max(0.0, ext - aper);
    return std::max(0.0, aper - ext + margin);
}

double entailment_pair_loss(const LorentzPoint& parent, const LorentzPoint& child,
                            const LossConfig& cfg, Polarity polarity) {
    double norm_sq = 0.0;
    for (double x : parent.space) norm_sq += x * x;
    if (std::sqrt(norm_sq) <= cfg.manifold.eps) {
        throw std::invalid_argument("entailment_pair_loss: parent at the origin");
    }
    const double ext = manifold::exterior_angle(parent, child, cfg.manifold);
    const double aper = manifold::half_aperture(parent, cfg.manifold);
    return entailment_hinge(ext, aper, cfg.margin, polarity);
}

int RankedLabelEmbeddings::deepest_rank() const {
    for (int r = data::kNumRanks - 1; r >= 0; --r) {
        if (by_rank[r]) return r;
    }
    return -1;
}

// ---------------------------------------------------------------------------
// batched ops
// ---------------------------------------------------------------------------

Var pairwise_lorentz_inner(const LorentzBatch& a, const LorentzBatch& b) {
    return ad::sub(ad::matmul(a.space, ad::transpose(b.space)),
                   ad::matmul(a.time, ad::transpose(b.time)));
}

Var pairwise_geodesic_distance(const LorentzBatch& a, const LorentzBatch& b,
                               const ManifoldConfig& mcfg) {
    Var inner = pairwise_lorentz_inner(a, b);
    Var arg = ad::mul(inner, -mcfg.curvature);
    return ad::div(ad::acosh_clamped(arg, mcfg.eps), mcfg.sqrt_c());
}

Var pairwise_exterior_angle(const LorentzBatch& parent, const LorentzBatch& child,
                            const ManifoldConfig& mcfg) {
    Var ci = ad::mul(pairwise_lorentz_inner(parent, child), mcfg.curvature);
    Var num = ad::add(ad::mul(ci, parent.time), ad::transpose(child.time));
    Var parent_norm = ad::clamp_min(ad::row_norm(parent.space), mcfg.eps);
    Var den = ad::mul(parent_norm,
                      ad::sqrt(ad::clamp_min(ad::sub(ad::mul(ci, ci), 1.0), mcfg.eps)));
    return ad::acos_clamped(ad::div(num, den), mcfg.eps);
}

Var half_aperture_column(const LorentzBatch& parent, const ManifoldConfig& mcfg) {
    Var parent_norm = ad::clamp_min(ad::row_norm(parent.space), mcfg.eps);
    return ad::asin_clamped(ad::div(mcfg.cone_k(), parent_norm), mcfg.eps);
}

namespace {

Tensor pair_mask(const std::vector<std::pair<int, int>>& pairs, int rows, int cols) {
    Tensor mask(rows, cols);
    for (const auto& [i, j] : pairs) mask.at(i, j) = 1.0;
    return mask;
}

}  // namespace

Var entailment_loss(const LorentzBatch& parent, const LorentzBatch& child,
                    const PairSets& pairs, const LossConfig& cfg) {
    if (cfg.el_mode == ElMode::none) {
        throw std::invalid_argument("entailment_loss: el_mode is 'none'");
    }
    if (pairs.positives.empty()) {
        throw std::invalid_argument("entailment_loss: empty positive pair set");
    }
    Graph& g = *parent.time.graph;
    const int rows = parent.size();
    const int cols = child.size();

    Var ext = pairwise_exterior_angle(parent, child, cfg.manifold);
    Var aper = half_aperture_column(parent, cfg.manifold);

    Var pos_hinge = ad::relu(ad::sub(ext, aper));
    Var mask_p = g.constant(pair_mask(pairs.positives, rows, cols));
    Var loss_pos = ad::div(ad::sum(ad::mul(pos_hinge, mask_p)),
                           static_cast<double>(pairs.positives.size()));
    if (cfg.el_mode == ElMode::pos) return loss_pos;

    // pos_neg: empty negative set contributes zero rather than erroring
    Var loss_neg = g.constant(Tensor::scalar(0.0));
    if (!pairs.negatives.empty()) {
        Var neg_hinge = ad::relu(ad::add(ad::sub(aper, ext), cfg.margin));
        Var mask_n = g.constant(pair_mask(pairs.negatives, rows, cols));
        loss_neg = ad::div(ad::sum(ad::mul(neg_hinge, mask_n)),
                           static_cast<double>(pairs.negatives.size()));
    }
    return ad::mul(ad::add(loss_pos, loss_neg), 0.5);
}

Var entailment_loss(const LorentzBatch& parent, const LorentzBatch& child,
                    const std::vector<int>& classes, const LossConfig& cfg) {
    return entailment_loss(parent, child, make_pair_sets(classes), cfg);
}

Var sel_intra(const EncodedBatch& emb, const data::BatchMeta& meta,
              const LossConfig& cfg) {
    Graph& g = *emb.image.time.graph;
    Var level_sum = g.constant(Tensor::scalar(0.0));
    int levels = 0;
    for (int r = 1; r < data::kNumRanks; ++r) {
        // an item enters level r with its rank-(r-1) class; it needs both the
        // parent-rank and the child-rank label
        std::vector<int> classes(meta.batch_size, -1);
        bool any = false;
        for (int i = 0; i < meta.batch_size; ++i) {
            if (meta.rank_class[r][i] >= 0 && meta.rank_class[r - 1][i] >= 0) {
                classes[i] = meta.rank_class[r - 1][i];
                any = true;
            }
        }
        if (!any) continue;
        level_sum = ad::add(level_sum,
                            entailment_loss(emb.text_rank[r - 1], emb.text_rank[r],
                                            classes, cfg));
        ++levels;
    }
    if (levels == 0) return g.constant(Tensor::scalar(0.0));
    return ad::div(level_sum, static_cast<double>(levels));
}

Var sel_inter(const EncodedBatch& emb, const data::BatchMeta& meta,
              const LossConfig& cfg) {
    for (int i = 0; i < meta.batch_size; ++i) {
        if (meta.deepest_class[i] < 0) {
            throw std::invalid_argument(
                "sel_inter: specimen without any taxonomic label in the batch");
        }
    }
    const PairSets pairs = make_pair_sets(meta.deepest_class);
    Var text_image = entailment_loss(emb.text_deepest, emb.image, pairs, cfg);
    Var text_dna = entailment_loss(emb.text_deepest, emb.dna, pairs, cfg);
    Var dna_image = entailment_loss(emb.dna, emb.image, pairs, cfg);
    return ad::div(ad::add(ad::add(text_image, text_dna), dna_image), 3.0);
}

Var contrastive_loss(const LorentzBatch& a, const LorentzBatch& b, Var log_temp,
                     const ManifoldConfig& mcfg) {
    const int n = a.size();
    if (n < 1) throw std::invalid_argument("contrastive_loss: empty batch");
    if (n != b.size()) {
        throw std::invalid_argument("contrastive_loss: batch sizes differ");
    }
    Var distances = pairwise_geodesic_distance(a, b, mcfg);
    Var logits = ad::div(ad::neg(distances), ad::exp(log_temp));
    std::vector<int> diagonal(n);
    for (int i = 0; i < n; ++i) diagonal[i] = i;
    Var row_ce = ad::softmax_cross_entropy(logits, diagonal);
    Var col_ce = ad::softmax_cross_entropy(ad::transpose(logits), diagonal);
    return ad::mul(ad::add(row_ce, col_ce), 0.5);
}

double TotalLoss::component(const std::string& name) const {
    for (const auto& [n, v] : components) {
        if (n == name) return v;
    }
    throw std::invalid_argument("TotalLoss: no component '" + name + "'");
}

bool TotalLoss::has_component(const std::string& name) const {
    for (const auto& [n, v] : components) {
        if (n == name) return true;
    }
    return false;
}

TotalLoss total_loss(const EncodedBatch& emb, const data::BatchMeta& meta,
                     Var log_temp, const LossConfig& cfg) {
    cfg.validate();
    Graph& g = *emb.image.time.graph;

    TotalLoss result;
    std::vector<Var> terms;

    if (cfg.use_cl) {
        std::vector<Var> pair_losses;
        if (cfg.use_image_dna_contrastive) {
            pair_losses.push_back(contrastive_loss(emb.image, emb.dna, log_temp,
                                                   cfg.manifold));
        }
        if (cfg.cl_text_pairs) {
            pair_losses.push_back(contrastive_loss(emb.image, emb.text_deepest,
                                                   log_temp, cfg.manifold));
            pair_losses.push_back(contrastive_loss(emb.dna, emb.text_deepest,
                                                   log_temp, cfg.manifold));
        }
        if (cfg.use_full_text) {
            if (!emb.text_full) {
                throw std::invalid_argument(
                    "total_loss: use_full_text set but the batch has no full-text "
                    "embeddings");
            }
            pair_losses.push_back(contrastive_loss(emb.image, *emb.text_full, log_temp,
                                                   cfg.manifold));
            pair_losses.push_back(contrastive_loss(emb.dna, *emb.text_full, log_temp,
                                                   cfg.manifold));
        }
        Var cl = pair_losses[0];
        for (std::size_t k = 1; k < pair_losses.size(); ++k) {
            cl = ad::add(cl, pair_losses[k]);
        }
        cl = ad::div(cl, static_cast<double>(pair_losses.size()));
        Var weighted = ad::mul(cl, cfg.weight_cl);
        result.components.emplace_back("contrastive", ad::scalar(weighted));
        terms.push_back(weighted);
    }

    if (cfg.use_el) {
        const PairSets pairs = make_pair_sets(meta.deepest_class);
        for (int i = 0; i < meta.batch_size; ++i) {
            if (meta.deepest_class[i] < 0) {
                throw std::invalid_argument(
                    "total_loss: specimen without any taxonomic label in the batch");
            }
        }
        Var el = entailment_loss(emb.text_deepest, emb.image, pairs, cfg);
        int n_terms = 1;
        if (cfg.el_apply_dna) {
            el = ad::add(el, entailment_loss(emb.text_deepest, emb.dna, pairs, cfg));
            ++n_terms;
        }
        el = ad::div(el, static_cast<double>(n_terms));
        Var weighted = ad::mul(el, cfg.weight_sel);
        result.components.emplace_back("entailment", ad::scalar(weighted));
        terms.push_back(weighted);
    }

    if (cfg.use_sel) {
        Var intra = ad::mul(sel_intra(emb, meta, cfg), cfg.weight_sel);
        Var inter = ad::mul(sel_inter(emb, meta, cfg), cfg.weight_sel);
        result.components.emplace_back("sel_intra", ad::scalar(intra));
        result.components.emplace_back("sel_inter", ad::scalar(inter));
        terms.push_back(intra);
        terms.push_back(inter);
    }

    Var total = terms.empty() ? g.constant(Tensor::scalar(0.0)) : terms[0];
    for (std::size_t k = 1; k < terms.size(); ++k) total = ad::add(total, terms[k]);
    result.total = total;
    return result;
}

double cone_violation_rate(
    const std::array<std::vector<LorentzPoint>, data::kNumRanks>& label_points,
    const data::TaxonomyIndex& taxonomy, const ManifoldConfig& mcfg) {
    std::size_t edges = 0;
    std::size_t violations = 0;
    for (int r = 1; r < data::kNumRanks; ++r) {
        for (std::size_t c = 0; c < taxonomy.classes[r].size(); ++c) {
            const int p = taxonomy.parent_of[r][c];
            if (p < 0) continue;
            const LorentzPoint& parent = label_points[r - 1][p];
            const LorentzPoint& child = label_points[r][c];
            double norm_sq = 0.0;
            for (double x : parent.space) norm_sq += x * x;
            if (std::sqrt(norm_sq) <= mcfg.eps) continue;  // apex undefined
            ++edges;
            if (manifold::exterior_angle(parent, child, mcfg) >
                manifold::half_aperture(parent, mcfg)) {
                ++violations;
            }
        }
    }
    if (edges == 0) return 0.0;
    return static_cast<double>(violations) / static_cast<double>(edges);
}

}  // namespace hyptax::losses

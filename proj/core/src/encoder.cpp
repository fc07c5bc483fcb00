// Copyright (C) 2026 hyptax authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "hyptax/rng.hpp"
#include "hyptax/trainer.hpp"

namespace hyptax::train {

namespace ad = autodiff;
using ad::Graph;

void TrainConfig::validate() const {
    if (epochs < 0) throw std::invalid_argument("TrainConfig: epochs must be >= 0");
    if (batch_size < 2) throw std::invalid_argument("TrainConfig: batch_size must be >= 2");
    if (!(lr_min > 0.0 && lr_min <= lr_max)) {
        throw std::invalid_argument("TrainConfig: need 0 < lr_min <= lr_max");
    }
    if (!(warmup_fraction > 0.0 && warmup_fraction < 1.0)) {
        throw std::invalid_argument("TrainConfig: warmup_fraction must be in (0, 1)");
    }
    if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
        throw std::invalid_argument("TrainConfig: Adam betas must be in [0, 1)");
    }
    if (!(adam_eps > 0.0)) throw std::invalid_argument("TrainConfig: adam_eps must be > 0");
    if (!(weight_decay >= 0.0)) {
        throw std::invalid_argument("TrainConfig: weight_decay must be >= 0");
    }
    if (d_in < 1 || d < 1) throw std::invalid_argument("TrainConfig: d_in and d must be >= 1");
    if (use_hidden && hidden_dim < 1) {
        throw std::invalid_argument("TrainConfig: hidden_dim must be >= 1");
    }
    loss.validate();
}

Tensor& ParamSet::at(const std::string& name) {
    auto it = tensors.find(name);
    if (it == tensors.end()) {
        throw std::invalid_argument("ParamSet: unknown parameter '" + name + "'");
    }
    return it->second;
}

const Tensor& ParamSet::at(const std::string& name) const {
    auto it = tensors.find(name);
    if (it == tensors.end()) {
        throw std::invalid_argument("ParamSet: unknown parameter '" + name + "'");
    }
    return it->second;
}

namespace {

Tensor gaussian_tensor(Rng& rng, int rows, int cols, double sigma) {
    Tensor t(rows, cols);
    for (double& x : t.data) x = sigma * rng.gaussian();
    return t;
}

const char* kModalities[3] = {"img", "dna", "text"};

}  // namespace

ParamSet init_params(const TrainConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    ParamSet p;
    // 1/d_in keeps initial hyperbolic radii moderate; cosh of large radii
    // destroys the on-manifold residual in double precision
    for (const char* mod : kModalities) {
        const std::string m(mod);
        if (cfg.use_hidden) {
            p.tensors[m + ".w1"] =
                gaussian_tensor(rng, cfg.d_in, cfg.hidden_dim, 1.0 / cfg.d_in);
            p.tensors[m + ".b1"] = Tensor::zeros(1, cfg.hidden_dim);
            p.tensors[m + ".w2"] =
                gaussian_tensor(rng, cfg.hidden_dim, cfg.d, 1.0 / cfg.hidden_dim);
            p.tensors[m + ".b2"] = Tensor::zeros(1, cfg.d);
        } else {
            p.tensors[m + ".w"] = gaussian_tensor(rng, cfg.d_in, cfg.d, 1.0 / cfg.d_in);
            p.tensors[m + ".b"] = Tensor::zeros(1, cfg.d);
        }
    }
    p.tensors["log_temp"] = Tensor::scalar(std::log(cfg.loss.init_temperature));
    return p;
}

std::vector<double> featurize_text(const std::string& text, int d_in) {
    std::vector<double> buckets(d_in, 0.0);
    std::size_t i = 0;
    bool any = false;
    while (i < text.size()) {
        while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
        std::size_t start = i;
        while (i < text.size() && text[i] != ' ' && text[i] != '\t') ++i;
        if (i == start) break;
        // FNV-1a 64
        std::uint64_t h = 0xCBF29CE484222325ULL;
        for (std::size_t k = start; k < i; ++k) {
            h ^= static_cast<unsigned char>(text[k]);
            h *= 0x100000001B3ULL;
        }
        buckets[h % static_cast<std::uint64_t>(d_in)] += 1.0;
        any = true;
    }
    if (!any) return buckets;
    double norm_sq = 0.0;
    for (double x : buckets) norm_sq += x * x;
    const double norm = std::sqrt(norm_sq);
    for (double& x : buckets) x /= norm;
    return buckets;
}

// ---------------------------------------------------------------------------
// graph encoding
// ---------------------------------------------------------------------------

namespace {

Var affine(const std::map<std::string, Var>& params, const std::string& mod,
           Var features, const TrainConfig& cfg) {
    if (cfg.use_hidden) {
        Var hidden = ad::relu(
            ad::add(ad::matmul(features, params.at(mod + ".w1")), params.at(mod + ".b1")));
        return ad::add(ad::matmul(hidden, params.at(mod + ".w2")), params.at(mod + ".b2"));
    }
    return ad::add(ad::matmul(features, params.at(mod + ".w")), params.at(mod + ".b"));
}

losses::LorentzBatch lift_to_hyperboloid(Var euclidean, double curvature) {
    const double sc = std::sqrt(curvature);
    Var z = ad::mul(ad::row_norm(euclidean), sc);
    losses::LorentzBatch out;
    out.time = ad::div(ad::cosh(z), sc);
    out.space = ad::mul(euclidean, ad::sinhc(z));
    return out;
}

Tensor feature_matrix(const std::vector<data::SpecimenRecord>& records,
                      const std::vector<int>& batch, bool dna, int d_in) {
    Tensor x(static_cast<int>(batch.size()), d_in);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto& feat = dna ? records[batch[i]].dna_feat : records[batch[i]].img_feat;
        if (static_cast<int>(feat.size()) != d_in) {
            throw std::invalid_argument(
                "encode_batch: record '" + records[batch[i]].id + "' has " +
                (dna ? std::string("dna") : std::string("img")) + " feature width " +
                std::to_string(feat.size()) + ", expected " + std::to_string(d_in));
        }
        for (int j = 0; j < d_in; ++j) x.at(static_cast<int>(i), j) = feat[j];
    }
    return x;
}

Tensor text_matrix(const std::vector<data::SpecimenRecord>& records,
                   const std::vector<int>& batch, int d_in,
                   const std::function<std::string(const data::SpecimenRecord&)>& text_of) {
    Tensor x(static_cast<int>(batch.size()), d_in);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const std::vector<double> row = featurize_text(text_of(records[batch[i]]), d_in);
        for (int j = 0; j < d_in; ++j) x.at(static_cast<int>(i), j) = row[j];
    }
    return x;
}

}  // namespace

losses::EncodedBatch encode_batch(Graph& g, const std::map<std::string, Var>& params,
                                  const std::vector<data::SpecimenRecord>& records,
                                  const std::vector<int>& batch, const TrainConfig& cfg) {
    const double c = cfg.loss.manifold.curvature;
    losses::EncodedBatch out;

    Var img = g.constant(feature_matrix(records, batch, false, cfg.d_in));
    Var dna = g.constant(feature_matrix(records, batch, true, cfg.d_in));
    out.image = lift_to_hyperboloid(affine(params, "img", img, cfg), c);
    out.dna = lift_to_hyperboloid(affine(params, "dna", dna, cfg), c);

    for (int r = 0; r < data::kNumRanks; ++r) {
        Var t = g.constant(text_matrix(records, batch, cfg.d_in,
                                       [r](const data::SpecimenRecord& rec) {
                                           return rec.has_rank(r) ? rec.path_text(r)
                                                                  : std::string();
                                       }));
        out.text_rank[r] = lift_to_hyperboloid(affine(params, "text", t, cfg), c);
    }

    Var deepest = g.constant(text_matrix(records, batch, cfg.d_in,
                                         [](const data::SpecimenRecord& rec) {
                                             const int dr = rec.deepest_rank();
                                             return dr >= 0 ? rec.path_text(dr)
                                                            : std::string();
                                         }));
    out.text_deepest = lift_to_hyperboloid(affine(params, "text", deepest, cfg), c);

    if (cfg.loss.use_full_text) {
        Var full = g.constant(text_matrix(records, batch, cfg.d_in,
                                          [](const data::SpecimenRecord& rec) {
                                              return data::build_full_text_key(rec.labels);
                                          }));
        out.text_full = lift_to_hyperboloid(affine(params, "text", full, cfg), c);
    }
    return out;
}

// ---------------------------------------------------------------------------
// pure encoding (evaluation path)
// ---------------------------------------------------------------------------

namespace {

std::vector<double> affine_pure(const std::vector<double>& x, const ParamSet& params,
                                const std::string& mod, const TrainConfig& cfg) {
    auto apply = [](const std::vector<double>& in, const Tensor& w, const Tensor& b,
                    bool relu_out) {
        std::vector<double> out(w.cols, 0.0);
        for (int j = 0; j < w.cols; ++j) {
            double s = 0.0;
            for (int k = 0; k < w.rows; ++k) s += in[k] * w.at(k, j);
            s += b.at(0, j);
            out[j] = relu_out && s < 0.0 ? 0.0 : s;
        }
        return out;
    };
    if (cfg.use_hidden) {
        const std::vector<double> h =
            apply(x, params.at(mod + ".w1"), params.at(mod + ".b1"), true);
        return apply(h, params.at(mod + ".w2"), params.at(mod + ".b2"), false);
    }
    return apply(x, params.at(mod + ".w"), params.at(mod + ".b"), false);
}

manifold::LorentzPoint lift_pure(const std::vector<double>& euclidean,
                                 const manifold::ManifoldConfig& mcfg) {
    manifold::TangentVector v;
    v.space = euclidean;
    return manifold::exp_map_origin(v, mcfg);
}

}  // namespace

manifold::LorentzPoint encode_text(const std::string& text, const ParamSet& params,
                                   const TrainConfig& cfg) {
    return lift_pure(affine_pure(featurize_text(text, cfg.d_in), params, "text", cfg),
                     cfg.loss.manifold);
}

std::vector<losses::SpecimenEmbeddings> encode_records(
    const std::vector<data::SpecimenRecord>& records, const ParamSet& params,
    const TrainConfig& cfg) {
    std::vector<losses::SpecimenEmbeddings> out;
    out.reserve(records.size());
    for (const data::SpecimenRecord& rec : records) {
        if (static_cast<int>(rec.img_feat.size()) != cfg.d_in ||
            static_cast<int>(rec.dna_feat.size()) != cfg.d_in) {
            throw std::invalid_argument("encode_records: record '" + rec.id +
                                        "' feature width does not match d_in");
        }
        losses::SpecimenEmbeddings emb;
        emb.image = lift_pure(affine_pure(rec.img_feat, params, "img", cfg),
                              cfg.loss.manifold);
        emb.dna = lift_pure(affine_pure(rec.dna_feat, params, "dna", cfg),
                            cfg.loss.manifold);
        for (int r = 0; r < data::kNumRanks; ++r) {
            if (rec.has_rank(r)) {
                emb.ranks.by_rank[r] = encode_text(rec.path_text(r), params, cfg);
            }
        }
        if (cfg.loss.use_full_text && rec.deepest_rank() >= 0) {
            emb.full_text = encode_text(data::build_full_text_key(rec.labels), params, cfg);
        }
        out.push_back(std::move(emb));
    }
    return out;
}

std::array<std::vector<manifold::LorentzPoint>, data::kNumRanks> encode_label_table(
    const data::TaxonomyIndex& taxonomy, const ParamSet& params,
    const TrainConfig& cfg) {
    std::array<std::vector<manifold::LorentzPoint>, data::kNumRanks> table;
    for (int r = 0; r < data::kNumRanks; ++r) {
        table[r].reserve(taxonomy.class_text[r].size());
        for (const std::string& text : taxonomy.class_text[r]) {
            table[r].push_back(encode_text(text, params, cfg));
        }
    }
    return table;
}

}  // namespace hyptax::train

// Copyright (C) 2026 hyptax authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>

#include "hyptax/dataset.hpp"
#include "hyptax/grad_check.hpp"
#include "hyptax/losses.hpp"
#include "hyptax/trainer.hpp"
#include "method_configs.hpp"
#include "naive_losses.hpp"
#include "test_helpers.hpp"

using namespace hyptax;
using namespace hyptax::losses;
using autodiff::Graph;
using autodiff::Tensor;
using autodiff::Var;
using hyptax::testing::method_configs;
using hyptax::testing::planar_point;
using manifold::ManifoldConfig;

namespace {

// solve for the rotation angle theta at which ext(parent, child(theta)) hits
// a target value; ext is monotone in theta at fixed child radius
double solve_child_angle(const LorentzPoint& parent, double child_radius,
                         double target_ext, const ManifoldConfig& mcfg) {
    double lo = 0.0, hi = std::numbers::pi;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double ext =
            manifold::exterior_angle(parent, planar_point(child_radius, mid, mcfg), mcfg);
        if (ext < target_ext) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// labelled random records over a tiny two-order taxonomy
std::vector<data::SpecimenRecord> make_records(Rng& rng, int n, int d_in,
                                               bool full_labels = true) {
    std::vector<data::SpecimenRecord> recs;
    for (int i = 0; i < n; ++i) {
        data::SpecimenRecord rec;
        rec.id = "r" + std::to_string(i);
        rec.split = data::Split::train_seen;
        const int o = i % 2, f = i % 4, g = i % 8;
        rec.labels[0] = "o" + std::to_string(o);
        rec.labels[1] = "f" + std::to_string(o) + std::to_string(f);
        if (full_labels || i % 3 != 0) {
            rec.labels[2] = "g" + std::to_string(o) + std::to_string(f) + std::to_string(g);
        }
        if (full_labels || i % 2 != 0) {
            rec.labels[3] = "s" + std::to_string(i % 5) + "_" + std::to_string(g);
        }
        rec.img_feat = rng.gaussians(d_in);
        rec.dna_feat = rng.gaussians(d_in);
        recs.push_back(std::move(rec));
    }
    return recs;
}

struct Fixture {
    data::Dataset ds;
    std::vector<int> batch;
    data::BatchMeta meta;
    train::TrainConfig cfg;
    train::ParamSet params;
    std::unique_ptr<Graph> graph;
    std::map<std::string, Var> vars;
    EncodedBatch emb;
    std::vector<SpecimenEmbeddings> pure;  // batch order, for the naive reference
};

Fixture make_fixture(std::vector<data::SpecimenRecord> records, const LossConfig& lcfg,
                     std::uint64_t seed = 9) {
    Fixture f;
    f.ds.records = std::move(records);
    f.ds.taxonomy = data::build_taxonomy(f.ds.records);
    f.cfg.d_in = 6;
    f.cfg.d = 5;
    f.cfg.seed = seed;
    f.cfg.loss = lcfg;
    f.params = train::init_params(f.cfg);
    for (std::size_t i = 0; i < f.ds.records.size(); ++i) {
        f.batch.push_back(static_cast<int>(i));
    }
    f.meta = data::build_batch_meta(f.ds.records, f.batch, f.ds.taxonomy);
    f.graph = std::make_unique<Graph>();
    for (const auto& [name, tensor] : f.params.tensors) {
        f.vars.emplace(name, f.graph->leaf(tensor));
    }
    f.emb = train::encode_batch(*f.graph, f.vars, f.ds.records, f.batch, f.cfg);
    f.pure = train::encode_records(f.ds.records, f.params, f.cfg);
    return f;
}

LossConfig default_sel_cl() {
    LossConfig cfg;  // defaults are SEL+CL with text pairs
    return cfg;
}

}  // namespace

TEST_SUITE("losses") {

TEST_CASE("entailment hinge arithmetic") {
    CHECK(entailment_hinge(0.4, 0.6, 0.1, Polarity::positive) == 0.0);
    CHECK(entailment_hinge(0.9, 0.5, 0.1, Polarity::positive) ==
          doctest::Approx(0.4).epsilon(1e-12));
    CHECK(entailment_hinge(0.4, 0.5, 0.2, Polarity::negative) ==
          doctest::Approx(0.3).epsilon(1e-12));
    CHECK(entailment_hinge(0.9, 0.5, 0.2, Polarity::negative) == 0.0);
}

TEST_CASE("entailment pair loss on constructed geometry") {
    LossConfig cfg = default_sel_cl();
    const ManifoldConfig& m = cfg.manifold;

    // parent along the x axis with |space| = 0.4 -> aperture = pi/6
    const double parent_radius = std::asinh(0.4);
    const LorentzPoint parent = planar_point(parent_radius, 0.0, m);
    const double aper = manifold::half_aperture(parent, m);
    CHECK(aper == doctest::Approx(std::numbers::pi / 6).epsilon(1e-9));

    SUBCASE("positive loss equals ext - aper beyond the cone") {
        const double theta = solve_child_angle(parent, 1.2, aper + 0.4, m);
        const LorentzPoint child = planar_point(1.2, theta, m);
        CHECK(entailment_pair_loss(parent, child, cfg, Polarity::positive) ==
              doctest::Approx(0.4).epsilon(1e-6));
    }
    SUBCASE("positive loss is zero inside the cone") {
        const LorentzPoint child = planar_point(1.2, 0.0, m);  // on the axis
        CHECK(entailment_pair_loss(parent, child, cfg, Polarity::positive) == 0.0);
    }
    SUBCASE("negative loss applies the margin") {
        cfg.margin = 0.2;
        const double theta = solve_child_angle(parent, 1.2, aper - 0.1, m);
        const LorentzPoint child = planar_point(1.2, theta, m);
        CHECK(entailment_pair_loss(parent, child, cfg, Polarity::negative) ==
              doctest::Approx(0.3).epsilon(1e-6));
    }
    SUBCASE("consistency with manifold angles") {
        Rng rng(3);
        for (int k = 0; k < 50; ++k) {
            const LorentzPoint u = testing::random_point(rng, 2, m, 0.3, 3.0);
            const LorentzPoint w = testing::random_point(rng, 2, m, 0.0, 3.0);
            const double ext = manifold::exterior_angle(u, w, m);
            const double ap = manifold::half_aperture(u, m);
            CHECK(entailment_pair_loss(u, w, cfg, Polarity::positive) ==
                  entailment_hinge(ext, ap, cfg.margin, Polarity::positive));
        }
    }
    SUBCASE("parent at the origin is rejected") {
        CHECK_THROWS_AS(entailment_pair_loss(manifold::origin(2, m),
                                             planar_point(1.0, 0.1, m), cfg,
                                             Polarity::positive),
                        std::invalid_argument);
    }
}

TEST_CASE("positive loss is monotone as the child rotates toward the axis") {
    const LossConfig cfg = default_sel_cl();
    const LorentzPoint parent = planar_point(0.8, 0.0, cfg.manifold);
    double prev = std::numeric_limits<double>::infinity();
    for (double theta = 1.5; theta >= 0.0; theta -= 0.05) {
        const LorentzPoint child = planar_point(1.5, theta, cfg.manifold);
        const double loss = entailment_pair_loss(parent, child, cfg, Polarity::positive);
        CHECK(loss <= prev + 1e-12);
        prev = loss;
    }
}

TEST_CASE("pair sets") {
    const PairSets sets = make_pair_sets({0, 1, 0, -1});
    CHECK(sets.positives.size() == 5);  // (0,0) (0,2) (1,1) (2,0) (2,2)
    CHECK(sets.negatives.size() == 4);  // (0,1) (1,0) (1,2) (2,1)
    for (const auto& [i, j] : sets.positives) {
        CHECK(i != 3);
        CHECK(j != 3);
    }
}

TEST_CASE("batched entailment matches the double-loop reference") {
    Rng rng(17);
    for (int trial = 0; trial < 8; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(9));
        auto records = make_records(rng, n, 6);
        LossConfig lcfg = default_sel_cl();
        lcfg.el_mode = trial % 2 ? ElMode::pos : ElMode::pos_neg;
        Fixture f = make_fixture(std::move(records), lcfg, 100 + trial);

        std::vector<LorentzPoint> text, image;
        for (int i = 0; i < f.meta.batch_size; ++i) {
            const int dr = f.meta.deepest_rank[i];
            text.push_back(*f.pure[i].ranks.by_rank[dr]);
            image.push_back(f.pure[i].image);
        }
        const double naive =
            testing::naive_entailment(text, image, f.meta.deepest_class, f.cfg.loss);
        const Var batched = entailment_loss(f.emb.text_deepest, f.emb.image,
                                            f.meta.deepest_class, f.cfg.loss);
        CHECK(autodiff::scalar(batched) == doctest::Approx(naive).epsilon(1e-9));
    }
}

TEST_CASE("entailment loss combination rules") {
    Rng rng(23);
    auto records = make_records(rng, 6, 6);
    LossConfig pos_cfg = default_sel_cl();
    pos_cfg.el_mode = ElMode::pos;
    LossConfig both_cfg = pos_cfg;
    both_cfg.el_mode = ElMode::pos_neg;

    Fixture f = make_fixture(std::move(records), both_cfg, 31);

    SUBCASE("pos_neg is the half-sum of the positive and negative means") {
        std::vector<LorentzPoint> text, image;
        for (int i = 0; i < f.meta.batch_size; ++i) {
            text.push_back(*f.pure[i].ranks.by_rank[f.meta.deepest_rank[i]]);
            image.push_back(f.pure[i].image);
        }
        double pos_sum = 0.0, neg_sum = 0.0;
        long pos_n = 0, neg_n = 0;
        for (std::size_t i = 0; i < text.size(); ++i) {
            const double aper = manifold::half_aperture(text[i], both_cfg.manifold);
            for (std::size_t j = 0; j < image.size(); ++j) {
                const double ext =
                    manifold::exterior_angle(text[i], image[j], both_cfg.manifold);
                if (f.meta.deepest_class[i] == f.meta.deepest_class[j]) {
                    pos_sum += std::max(0.0, ext - aper);
                    ++pos_n;
                } else {
                    neg_sum += std::max(0.0, aper - ext + both_cfg.margin);
                    ++neg_n;
                }
            }
        }
        const double expected =
            0.5 * (pos_sum / pos_n + (neg_n ? neg_sum / neg_n : 0.0));
        const Var batched = entailment_loss(f.emb.text_deepest, f.emb.image,
                                            f.meta.deepest_class, both_cfg);
        CHECK(autodiff::scalar(batched) == doctest::Approx(expected).epsilon(1e-9));

        const Var pos_only = entailment_loss(f.emb.text_deepest, f.emb.image,
                                             f.meta.deepest_class, pos_cfg);
        CHECK(autodiff::scalar(pos_only) ==
              doctest::Approx(pos_sum / pos_n).epsilon(1e-9));
    }
    SUBCASE("empty positives error") {
        const std::vector<int> none(f.meta.batch_size, -1);
        CHECK_THROWS_AS(
            entailment_loss(f.emb.text_deepest, f.emb.image, none, both_cfg),
            std::invalid_argument);
    }
    SUBCASE("empty negatives contribute zero under pos_neg") {
        const std::vector<int> same(f.meta.batch_size, 0);
        const Var both =
            entailment_loss(f.emb.text_deepest, f.emb.image, same, both_cfg);
        const Var pos =
            entailment_loss(f.emb.text_deepest, f.emb.image, same, pos_cfg);
        CHECK(autodiff::scalar(both) ==
              doctest::Approx(0.5 * autodiff::scalar(pos)).epsilon(1e-12));
    }
}

TEST_CASE("mean-over-positives example: per-pair losses 0 and 0.4 average to 0.2") {
    // two specimens of different classes; positives are the diagonal pairs
    const ManifoldConfig m;
    LossConfig cfg = default_sel_cl();
    cfg.el_mode = ElMode::pos;

    Graph g;
    const double r_parent = std::asinh(0.4);  // aperture pi/6 at both parents
    const LorentzPoint p0 = planar_point(r_parent, 0.0, m);
    const LorentzPoint p1 = planar_point(r_parent, 2.0, m);
    const double aper = manifold::half_aperture(p0, m);

    // child 0 inside parent 0's cone (loss 0); child 1 at ext = aper + 0.4.
    // The relative angle comes from the axis-aligned parent (rotation
    // invariance), then child 1 is placed relative to parent 1's direction.
    const LorentzPoint c0 = planar_point(1.0, 0.0, m);
    const double theta1 = solve_child_angle(p0, 1.0, aper + 0.4, m);
    const LorentzPoint c1 = planar_point(1.0, 2.0 + theta1, m);

    auto batch_of = [&](const LorentzPoint& a, const LorentzPoint& b) {
        LorentzBatch lb;
        Tensor time(2, 1), space(2, 2);
        time.at(0, 0) = a.time;
        time.at(1, 0) = b.time;
        for (int j = 0; j < 2; ++j) {
            space.at(0, j) = a.space[j];
            space.at(1, j) = b.space[j];
        }
        lb.time = g.constant(time);
        lb.space = g.constant(space);
        return lb;
    };
    const LorentzBatch parents = batch_of(p0, p1);
    const LorentzBatch children = batch_of(c0, c1);
    const Var loss = entailment_loss(parents, children, {0, 1}, cfg);
    CHECK(autodiff::scalar(loss) == doctest::Approx(0.2).epsilon(1e-6));
}

TEST_CASE("fully satisfied pair sets give exactly zero entailment loss") {
    // two classes on well-separated rays; children on their parent's axis
    // (positives contained) and far outside the other cone (negatives
    // separated beyond the margin)
    const ManifoldConfig m;
    LossConfig cfg = default_sel_cl();
    cfg.el_mode = ElMode::pos_neg;

    Graph g;
    const LorentzPoint p0 = planar_point(0.8, 0.0, m);
    const LorentzPoint p1 = planar_point(0.8, 2.5, m);
    const LorentzPoint c0 = planar_point(1.6, 0.0, m);
    const LorentzPoint c1 = planar_point(1.6, 2.5, m);

    Tensor time(2, 1), space(2, 2), ctime(2, 1), cspace(2, 2);
    time.at(0, 0) = p0.time;
    time.at(1, 0) = p1.time;
    ctime.at(0, 0) = c0.time;
    ctime.at(1, 0) = c1.time;
    for (int j = 0; j < 2; ++j) {
        space.at(0, j) = p0.space[j];
        space.at(1, j) = p1.space[j];
        cspace.at(0, j) = c0.space[j];
        cspace.at(1, j) = c1.space[j];
    }
    const LorentzBatch parents{g.constant(time), g.constant(space)};
    const LorentzBatch children{g.constant(ctime), g.constant(cspace)};

    REQUIRE(manifold::exterior_angle(p0, c1, m) >
            manifold::half_aperture(p0, m) + cfg.margin);
    CHECK(autodiff::scalar(entailment_loss(parents, children, {0, 1}, cfg)) == 0.0);
}

TEST_CASE("sel_intra availability rules") {
    Rng rng(37);

    SUBCASE("full labels: mean over the three consecutive levels") {
        Fixture f = make_fixture(make_records(rng, 8, 6), default_sel_cl(), 41);
        const double naive = testing::naive_sel_intra(f.pure, f.meta, f.cfg.loss);
        CHECK(autodiff::scalar(sel_intra(f.emb, f.meta, f.cfg.loss)) ==
              doctest::Approx(naive).epsilon(1e-9));
        CHECK(naive >= 0.0);
    }
    SUBCASE("order-only labels: no consecutive pair, loss 0") {
        auto records = make_records(rng, 5, 6);
        for (auto& rec : records) {
            rec.labels[1].reset();
            rec.labels[2].reset();
            rec.labels[3].reset();
        }
        Fixture f = make_fixture(std::move(records), default_sel_cl(), 43);
        CHECK(autodiff::scalar(sel_intra(f.emb, f.meta, f.cfg.loss)) == 0.0);
    }
    SUBCASE("order+family only: equals the single family-level term") {
        auto records = make_records(rng, 5, 6);
        for (auto& rec : records) {
            rec.labels[2].reset();
            rec.labels[3].reset();
        }
        Fixture f = make_fixture(std::move(records), default_sel_cl(), 47);

        std::vector<LorentzPoint> parents, children;
        std::vector<int> classes;
        for (int i = 0; i < f.meta.batch_size; ++i) {
            parents.push_back(*f.pure[i].ranks.by_rank[0]);
            children.push_back(*f.pure[i].ranks.by_rank[1]);
            classes.push_back(f.meta.rank_class[0][i]);
        }
        const double level =
            testing::naive_entailment(parents, children, classes, f.cfg.loss);
        CHECK(autodiff::scalar(sel_intra(f.emb, f.meta, f.cfg.loss)) ==
              doctest::Approx(level).epsilon(1e-9));
    }
}

TEST_CASE("sel_inter deepest-label nesting") {
    Rng rng(53);

    SUBCASE("matches the reference and the unweighted three-term mean") {
        Fixture f = make_fixture(make_records(rng, 7, 6), default_sel_cl(), 59);
        const double naive = testing::naive_sel_inter(f.pure, f.meta, f.cfg.loss);
        CHECK(autodiff::scalar(sel_inter(f.emb, f.meta, f.cfg.loss)) ==
              doctest::Approx(naive).epsilon(1e-9));
    }
    SUBCASE("species missing: genus embedding is the anchor") {
        auto records = make_records(rng, 4, 6);
        for (auto& rec : records) rec.labels[3].reset();  // deepest = genus
        Fixture f = make_fixture(std::move(records), default_sel_cl(), 61);
        for (int i = 0; i < f.meta.batch_size; ++i) {
            CHECK(f.meta.deepest_rank[i] == 2);
            const auto& deepest_time = autodiff::forward(f.emb.text_deepest.time);
            const auto& genus_time = autodiff::forward(f.emb.text_rank[2].time);
            CHECK(deepest_time.at(i, 0) == genus_time.at(i, 0));
        }
        const double naive = testing::naive_sel_inter(f.pure, f.meta, f.cfg.loss);
        CHECK(autodiff::scalar(sel_inter(f.emb, f.meta, f.cfg.loss)) ==
              doctest::Approx(naive).epsilon(1e-9));
    }
    SUBCASE("unlabelled specimen is rejected") {
        auto records = make_records(rng, 3, 6);
        for (int r = 0; r < data::kNumRanks; ++r) records[1].labels[r].reset();
        Fixture f = make_fixture(std::move(records), default_sel_cl(), 67);
        CHECK_THROWS_AS(sel_inter(f.emb, f.meta, f.cfg.loss), std::invalid_argument);
    }
}

TEST_CASE("contrastive loss") {
    const ManifoldConfig m;

    SUBCASE("batch of one is zero") {
        Graph g;
        Tensor time(1, 1), space(1, 2);
        time.at(0, 0) = std::cosh(0.5);
        space.at(0, 0) = std::sinh(0.5);
        LorentzBatch a{g.constant(time), g.constant(space)};
        Var lt = g.leaf(Tensor::scalar(std::log(0.07)));
        CHECK(autodiff::scalar(contrastive_loss(a, a, lt, m)) == 0.0);
    }
    SUBCASE("two points at distance 2, varying temperature") {
        // a_i == b_i, cross distances exactly 2
        Graph g;
        Tensor time(2, 1), space(2, 2);
        time.at(0, 0) = std::cosh(1.0);
        time.at(1, 0) = std::cosh(1.0);
        space.at(0, 0) = std::sinh(1.0);
        space.at(1, 0) = -std::sinh(1.0);
        LorentzBatch a{g.constant(time), g.constant(space)};

        Var lt1 = g.leaf(Tensor::scalar(std::log(1.0)));
        // the diagonal distance carries ~1e-8 of acosh-near-1 rounding noise
        const double loss1 = autodiff::scalar(contrastive_loss(a, a, lt1, m));
        CHECK(loss1 == doctest::Approx(std::log1p(std::exp(-2.0))).epsilon(1e-6));
        CHECK(loss1 == doctest::Approx(0.126928).epsilon(1e-4));

        Var lt2 = g.leaf(Tensor::scalar(std::log(0.07)));
        const double loss2 = autodiff::scalar(contrastive_loss(a, a, lt2, m));
        const double expected = std::log1p(std::exp(-2.0 / 0.07));
        CHECK(std::abs(loss2 - expected) <= 1e-14);
        CHECK(loss2 == doctest::Approx(3.89e-13).epsilon(0.01));
    }
    SUBCASE("matches the double-loop reference") {
        Rng rng(71);
        Fixture f = make_fixture(make_records(rng, 9, 6), default_sel_cl(), 73);
        std::vector<LorentzPoint> image, dna;
        for (int i = 0; i < f.meta.batch_size; ++i) {
            image.push_back(f.pure[i].image);
            dna.push_back(f.pure[i].dna);
        }
        const double tau = f.cfg.loss.init_temperature;
        const double naive = testing::naive_contrastive(image, dna, tau, m);
        const Var batched = contrastive_loss(f.emb.image, f.emb.dna,
                                             f.vars.at("log_temp"), m);
        CHECK(autodiff::scalar(batched) == doctest::Approx(naive).epsilon(1e-9));
    }
    SUBCASE("size mismatch is rejected") {
        Graph g;
        LorentzBatch a{g.constant(Tensor::full(2, 1, 1.0)), g.constant(Tensor::zeros(2, 2))};
        LorentzBatch b{g.constant(Tensor::full(3, 1, 1.0)), g.constant(Tensor::zeros(3, 2))};
        Var lt = g.leaf(Tensor::scalar(0.0));
        CHECK_THROWS_AS(contrastive_loss(a, b, lt, m), std::invalid_argument);
    }
}

TEST_CASE("total loss per method configuration") {
    Rng rng(79);

    SUBCASE("components sum exactly to the total, every config") {
        for (const auto& [name, lcfg] : method_configs()) {
            CAPTURE(name);
            Fixture f = make_fixture(make_records(rng, 8, 6), lcfg, 83);
            const TotalLoss tl =
                total_loss(f.emb, f.meta, f.vars.at("log_temp"), lcfg);
            double sum = 0.0;
            for (const auto& [cname, v] : tl.components) sum += v;
            CHECK(autodiff::scalar(tl.total) == sum);
        }
    }
    SUBCASE("SEL config: total = intra + inter exactly") {
        LossConfig sel = method_configs()[3].cfg;
        REQUIRE(sel.use_sel);
        REQUIRE_FALSE(sel.use_cl);
        Fixture f = make_fixture(make_records(rng, 8, 6), sel, 89);
        const TotalLoss tl = total_loss(f.emb, f.meta, f.vars.at("log_temp"), sel);
        CHECK(autodiff::scalar(tl.total) ==
              tl.component("sel_intra") + tl.component("sel_inter"));
        CHECK_FALSE(tl.has_component("contrastive"));
    }
    SUBCASE("weighted sum with explicit weights") {
        LossConfig cfg = default_sel_cl();
        cfg.weight_cl = 2.0;
        cfg.weight_sel = 0.5;
        Fixture f = make_fixture(make_records(rng, 8, 6), cfg, 97);
        const TotalLoss weighted =
            total_loss(f.emb, f.meta, f.vars.at("log_temp"), cfg);

        cfg.weight_cl = 1.0;
        cfg.weight_sel = 1.0;
        const TotalLoss plain = total_loss(f.emb, f.meta, f.vars.at("log_temp"), cfg);
        CHECK(weighted.component("contrastive") ==
              doctest::Approx(2.0 * plain.component("contrastive")).epsilon(1e-12));
        CHECK(weighted.component("sel_intra") ==
              doctest::Approx(0.5 * plain.component("sel_intra")).epsilon(1e-12));
    }
    SUBCASE("CL-only config reports no entailment components") {
        const LossConfig cl = method_configs()[0].cfg;
        Fixture f = make_fixture(make_records(rng, 6, 6), cl, 101);
        const TotalLoss tl = total_loss(f.emb, f.meta, f.vars.at("log_temp"), cl);
        CHECK(tl.has_component("contrastive"));
        CHECK_FALSE(tl.has_component("entailment"));
        CHECK_FALSE(tl.has_component("sel_intra"));
        CHECK_FALSE(tl.has_component("sel_inter"));
    }
    SUBCASE("contradictory flags are rejected") {
        LossConfig bad = default_sel_cl();
        bad.use_el = true;  // EL and SEL both on
        CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

        LossConfig none = default_sel_cl();
        none.use_cl = false;
        none.use_sel = false;
        CHECK_THROWS_AS(none.validate(), std::invalid_argument);

        LossConfig stale = default_sel_cl();
        stale.el_mode = ElMode::none;  // SEL on but polarity none
        CHECK_THROWS_AS(stale.validate(), std::invalid_argument);
    }
}

TEST_CASE("batched total equals the double-loop reference across configs") {
    Rng rng(103);
    for (const auto& [name, lcfg] : method_configs()) {
        CAPTURE(name);
        for (int n : {2, 5, 17, 32}) {
            Fixture f = make_fixture(make_records(rng, n, 6), lcfg, 500 + n);
            const TotalLoss batched =
                total_loss(f.emb, f.meta, f.vars.at("log_temp"), lcfg);
            const testing::NaiveTotal naive = testing::naive_total_loss(
                f.pure, f.meta, f.cfg.loss.init_temperature, lcfg);
            CHECK(std::abs(autodiff::scalar(batched.total) - naive.total) <= 1e-6);
        }
    }
}

TEST_CASE("permutation invariance of every component") {
    Rng rng(107);
    const auto records = make_records(rng, 10, 6);
    const LossConfig lcfg = default_sel_cl();

    Fixture f = make_fixture(records, lcfg, 113);
    const TotalLoss base = total_loss(f.emb, f.meta, f.vars.at("log_temp"), lcfg);

    auto shuffled = records;
    std::vector<int> perm = {7, 2, 9, 0, 4, 1, 8, 3, 6, 5};
    for (std::size_t i = 0; i < perm.size(); ++i) shuffled[i] = records[perm[i]];
    Fixture fp = make_fixture(std::move(shuffled), lcfg, 113);
    const TotalLoss permuted = total_loss(fp.emb, fp.meta, fp.vars.at("log_temp"), lcfg);

    CHECK(autodiff::scalar(permuted.total) ==
          doctest::Approx(autodiff::scalar(base.total)).epsilon(1e-9));
    for (const auto& [name, v] : base.components) {
        CHECK(permuted.component(name) == doctest::Approx(v).epsilon(1e-9));
    }
}

TEST_CASE("gradients of every configured loss pass the finite-difference check") {
    Rng rng(127);
    for (const auto& [name, lcfg] : method_configs()) {
        CAPTURE(name);
        auto records = make_records(rng, 6, 6);
        train::TrainConfig cfg;
        cfg.d_in = 6;
        cfg.d = 5;
        cfg.seed = 131;
        cfg.loss = lcfg;
        const data::Dataset ds{records, data::build_taxonomy(records)};
        std::vector<int> batch;
        for (std::size_t i = 0; i < records.size(); ++i) batch.push_back(static_cast<int>(i));
        const data::BatchMeta meta = data::build_batch_meta(ds.records, batch, ds.taxonomy);

        const autodiff::ParamMap params = train::init_params(cfg).tensors;
        const autodiff::GradCheckReport report = autodiff::check_gradient(
            [&](Graph& g, const std::map<std::string, Var>& vars) {
                EncodedBatch emb = train::encode_batch(g, vars, ds.records, batch, cfg);
                return total_loss(emb, meta, vars.at("log_temp"), lcfg).total;
            },
            params);
        CHECK(report.max_relative_error < 1e-4);
    }
}

}  // TEST_SUITE

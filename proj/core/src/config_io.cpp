// Copyright (C) 2026 hyptax authors
// SPDX-License-Identifier: Apache-2.0

#include "hyptax/config_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hyptax/errors.hpp"

namespace hyptax {

using nlohmann::json;

namespace {

json parse_or_throw(const std::string& text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string(what) + ": invalid JSON: " + e.what());
    }
}

void reject_unknown(const json& obj, const std::set<std::string>& known,
                    const char* where) {
    for (const auto& [key, value] : obj.items()) {
        if (!known.count(key)) {
            throw DataError(std::string(where) + ": unknown key '" + key + "'");
        }
    }
}

template <class T>
void read(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) {
        try {
            out = obj.at(key).get<T>();
        } catch (const json::exception& e) {
            throw DataError(std::string("config key '") + key + "': " + e.what());
        }
    }
}

json manifold_to_json(const manifold::ManifoldConfig& m) {
    return {{"curvature", m.curvature}, {"r_min", m.r_min}, {"eps", m.eps}};
}

manifold::ManifoldConfig manifold_from_json(const json& obj) {
    reject_unknown(obj, {"curvature", "r_min", "eps"}, "manifold");
    manifold::ManifoldConfig m;
    read(obj, "curvature", m.curvature);
    read(obj, "r_min", m.r_min);
    read(obj, "eps", m.eps);
    return m;
}

json loss_to_json(const losses::LossConfig& l) {
    return {{"margin", l.margin},
            {"init_temperature", l.init_temperature},
            {"el_mode", losses::el_mode_name(l.el_mode)},
            {"use_cl", l.use_cl},
            {"use_el", l.use_el},
            {"use_sel", l.use_sel},
            {"use_full_text", l.use_full_text},
            {"use_image_dna_contrastive", l.use_image_dna_contrastive},
            {"cl_text_pairs", l.cl_text_pairs},
            {"el_apply_dna", l.el_apply_dna},
            {"weight_cl", l.weight_cl},
            {"weight_sel", l.weight_sel},
            {"manifold", manifold_to_json(l.manifold)}};
}

losses::LossConfig loss_from_json(const json& obj) {
    reject_unknown(obj,
                   {"margin", "init_temperature", "el_mode", "use_cl", "use_el",
                    "use_sel", "use_full_text", "use_image_dna_contrastive",
                    "cl_text_pairs", "el_apply_dna", "weight_cl", "weight_sel",
                    "manifold"},
                   "loss");
    losses::LossConfig l;
    read(obj, "margin", l.margin);
    read(obj, "init_temperature", l.init_temperature);
    if (obj.contains("el_mode")) {
        l.el_mode = losses::parse_el_mode(obj.at("el_mode").get<std::string>());
    }
    read(obj, "use_cl", l.use_cl);
    read(obj, "use_el", l.use_el);
    read(obj, "use_sel", l.use_sel);
    read(obj, "use_full_text", l.use_full_text);
    read(obj, "use_image_dna_contrastive", l.use_image_dna_contrastive);
    read(obj, "cl_text_pairs", l.cl_text_pairs);
    read(obj, "el_apply_dna", l.el_apply_dna);
    read(obj, "weight_cl", l.weight_cl);
    read(obj, "weight_sel", l.weight_sel);
    if (obj.contains("manifold")) l.manifold = manifold_from_json(obj.at("manifold"));
    return l;
}

}  // namespace

std::string train_config_to_json(const train::TrainConfig& cfg) {
    json obj = {{"epochs", cfg.epochs},
                {"batch_size", cfg.batch_size},
                {"lr_min", cfg.lr_min},
                {"lr_max", cfg.lr_max},
                {"beta1", cfg.beta1},
                {"beta2", cfg.beta2},
                {"adam_eps", cfg.adam_eps},
                {"weight_decay", cfg.weight_decay},
                {"warmup_fraction", cfg.warmup_fraction},
                {"seed", cfg.seed},
                {"d_in", cfg.d_in},
                {"d", cfg.d},
                {"use_hidden", cfg.use_hidden},
                {"hidden_dim", cfg.hidden_dim},
                {"loss", loss_to_json(cfg.loss)}};
    return obj.dump(2) + "\n";
}

train::TrainConfig train_config_from_json(const std::string& text) {
    const json obj = parse_or_throw(text, "train config");
    reject_unknown(obj,
                   {"epochs", "batch_size", "lr_min", "lr_max", "beta1", "beta2",
                    "adam_eps", "weight_decay", "warmup_fraction", "seed", "d_in", "d",
                    "use_hidden", "hidden_dim", "loss"},
                   "train config");
    train::TrainConfig cfg;
    read(obj, "epochs", cfg.epochs);
    read(obj, "batch_size", cfg.batch_size);
    read(obj, "lr_min", cfg.lr_min);
    read(obj, "lr_max", cfg.lr_max);
    read(obj, "beta1", cfg.beta1);
    read(obj, "beta2", cfg.beta2);
    read(obj, "adam_eps", cfg.adam_eps);
    read(obj, "weight_decay", cfg.weight_decay);
    read(obj, "warmup_fraction", cfg.warmup_fraction);
    read(obj, "seed", cfg.seed);
    read(obj, "d_in", cfg.d_in);
    read(obj, "d", cfg.d);
    read(obj, "use_hidden", cfg.use_hidden);
    read(obj, "hidden_dim", cfg.hidden_dim);
    if (obj.contains("loss")) cfg.loss = loss_from_json(obj.at("loss"));
    return cfg;
}

train::TrainConfig load_train_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return train_config_from_json(buf.str());
}

std::string synth_spec_to_json(const data::SynthSpec& spec) {
    json obj = {{"branching", spec.branching},
                {"specimens_per_species", spec.specimens_per_species},
                {"d_in", spec.d_in},
                {"noise_sigma", spec.noise_sigma},
                {"unseen_fraction", spec.unseen_fraction},
                {"seed", spec.seed}};
    return obj.dump(2) + "\n";
}

data::SynthSpec synth_spec_from_json(const std::string& text) {
    const json obj = parse_or_throw(text, "synth spec");
    reject_unknown(obj,
                   {"branching", "specimens_per_species", "d_in", "noise_sigma",
                    "unseen_fraction", "seed"},
                   "synth spec");
    data::SynthSpec spec;
    read(obj, "branching", spec.branching);
    read(obj, "specimens_per_species", spec.specimens_per_species);
    read(obj, "d_in", spec.d_in);
    read(obj, "noise_sigma", spec.noise_sigma);
    read(obj, "unseen_fraction", spec.unseen_fraction);
    read(obj, "seed", spec.seed);
    return spec;
}

data::SynthSpec load_synth_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open synth spec '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return synth_spec_from_json(buf.str());
}

}  // namespace hyptax

// Copyright (C) 2026 hyptax authors
// SPDX-License-Identifier: Apache-2.0

#include "hyptax/trainer.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "hyptax/config_io.hpp"
#include "hyptax/errors.hpp"
#include "hyptax/evaluator.hpp"
#include "hyptax/rng.hpp"

namespace hyptax::train {

namespace ad = autodiff;
using ad::Graph;
using nlohmann::json;

double one_cycle_lr(long step, long total_steps, const TrainConfig& cfg) {
    if (step < 0 || step >= total_steps) {
        throw std::invalid_argument("one_cycle_lr: step outside [0, total_steps)");
    }
    const double span = cfg.lr_max - cfg.lr_min;
    long warm = static_cast<long>(cfg.warmup_fraction * static_cast<double>(total_steps));
    if (warm < 1) warm = 1;
    if (step <= warm) {
        const double frac = static_cast<double>(step) / static_cast<double>(warm);
        return cfg.lr_min + span * 0.5 * (1.0 - std::cos(std::numbers::pi * frac));
    }
    const long tail = total_steps - 1 - warm;
    if (tail <= 0) return cfg.lr_min;
    const double frac = static_cast<double>(step - warm) / static_cast<double>(tail);
    return cfg.lr_min + span * 0.5 * (1.0 + std::cos(std::numbers::pi * frac));
}

namespace {

void adam_update(ParamSet& params, const std::map<std::string, Var>& vars, Graph& g,
                 AdamState& opt, double lr, const TrainConfig& cfg) {
    if (opt.m.empty()) {
        for (const auto& [name, tensor] : params.tensors) {
            opt.m.emplace(name, Tensor::zeros(tensor.rows, tensor.cols));
            opt.v.emplace(name, Tensor::zeros(tensor.rows, tensor.cols));
        }
    }
    opt.t += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(opt.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(opt.t));
    for (auto& [name, theta] : params.tensors) {
        const Tensor& grad = g.grad(vars.at(name));
        Tensor& m = opt.m.at(name);
        Tensor& v = opt.v.at(name);
        const bool decay = name != "log_temp";
        for (int k = 0; k < theta.size(); ++k) {
            const double gk = grad.data[k];
            m.data[k] = cfg.beta1 * m.data[k] + (1.0 - cfg.beta1) * gk;
            v.data[k] = cfg.beta2 * v.data[k] + (1.0 - cfg.beta2) * gk * gk;
            const double mhat = m.data[k] / bc1;
            const double vhat = v.data[k] / bc2;
            double update = mhat / (std::sqrt(vhat) + cfg.adam_eps);
            if (decay) update += cfg.weight_decay * theta.data[k];
            theta.data[k] -= lr * update;
        }
    }
}

}  // namespace

StepRecord train_step(const std::vector<data::SpecimenRecord>& records,
                      const std::vector<int>& batch,
                      const data::TaxonomyIndex& taxonomy, ParamSet& params,
                      AdamState& opt, long step, long total_steps,
                      const TrainConfig& cfg) {
    Graph g;
    std::map<std::string, Var> vars;
    for (const auto& [name, tensor] : params.tensors) {
        vars.emplace(name, g.leaf(tensor));
    }

    losses::EncodedBatch emb = encode_batch(g, vars, records, batch, cfg);
    const data::BatchMeta meta = data::build_batch_meta(records, batch, taxonomy);
    losses::TotalLoss loss = losses::total_loss(emb, meta, vars.at("log_temp"), cfg.loss);

    StepRecord rec;
    rec.step = step;
    rec.total = ad::scalar(loss.total);
    rec.components = loss.components;
    rec.temperature = std::exp(params.at("log_temp").scalar_value());
    if (!std::isfinite(rec.total)) {
        std::string detail;
        for (const auto& [name, value] : loss.components) {
            detail += " " + name + "=" + std::to_string(value);
        }
        throw NumericError("train_step: non-finite loss at step " + std::to_string(step) +
                           ";" + detail);
    }

    g.backward(loss.total);
    rec.lr = one_cycle_lr(step, total_steps, cfg);
    adam_update(params, vars, g, opt, rec.lr, cfg);
    return rec;
}

namespace {

std::optional<double> val_species_macro(const data::Dataset& dataset,
                                        const ParamSet& params, const TrainConfig& cfg) {
    std::vector<int> val_idx, key_idx;
    for (std::size_t i = 0; i < dataset.records.size(); ++i) {
        const auto split = dataset.records[i].split;
        if (split == data::Split::val) val_idx.push_back(static_cast<int>(i));
        if (split == data::Split::train_seen) key_idx.push_back(static_cast<int>(i));
    }
    if (val_idx.empty() || key_idx.empty()) return std::nullopt;

    const int species = data::kNumRanks - 1;
    std::vector<manifold::LorentzPoint> queries, keys;
    std::vector<std::string> truths, key_labels;
    for (int i : val_idx) {
        const auto& rec = dataset.records[i];
        if (!rec.has_rank(species)) continue;
        losses::SpecimenEmbeddings emb = encode_records({rec}, params, cfg)[0];
        queries.push_back(emb.dna);
        truths.push_back(rec.class_key(species));
    }
    for (int i : key_idx) {
        const auto& rec = dataset.records[i];
        losses::SpecimenEmbeddings emb = encode_records({rec}, params, cfg)[0];
        keys.push_back(emb.dna);
        key_labels.push_back(rec.class_key(species));
    }
    if (queries.empty()) return std::nullopt;
    const std::vector<std::string> preds =
        eval::retrieve_top1(queries, keys, key_labels, cfg.loss.manifold);
    return eval::accuracy_macro(preds, truths, {truths.begin(), truths.end()});
}

}  // namespace

Checkpoint train(const data::Dataset& dataset, const TrainConfig& cfg,
                 const Checkpoint* resume, const StepCallback& on_step,
                 const EpochCallback& on_epoch, int stop_after_epoch) {
    cfg.validate();

    std::vector<int> train_idx;
    for (std::size_t i = 0; i < dataset.records.size(); ++i) {
        if (dataset.records[i].split == data::Split::train_seen) {
            train_idx.push_back(static_cast<int>(i));
        }
    }
    if (train_idx.empty()) {
        throw std::invalid_argument("train: dataset has no train_seen records");
    }

    Checkpoint ckpt;
    if (resume != nullptr) {
        ckpt = *resume;
    } else {
        ckpt.config = cfg;
        ckpt.params = init_params(cfg);
        Rng rng(cfg.seed);
        ckpt.rng_state = rng.state();
        ckpt.epoch = 0;
        ckpt.step = 0;
    }

    const long steps_per_epoch =
        static_cast<long>((train_idx.size() + cfg.batch_size - 1) / cfg.batch_size);
    const long total_steps = steps_per_epoch * cfg.epochs;

    for (int epoch = ckpt.epoch; epoch < cfg.epochs; ++epoch) {
        const auto batches =
            data::make_batches(train_idx.size(), cfg.batch_size, cfg.seed, epoch);
        double loss_sum = 0.0;
        long batch_count = 0;
        for (const std::vector<int>& local : batches) {
            std::vector<int> batch;
            batch.reserve(local.size());
            for (int k : local) batch.push_back(train_idx[k]);
            StepRecord rec = train_step(dataset.records, batch, dataset.taxonomy,
                                        ckpt.params, ckpt.opt, ckpt.step, total_steps, cfg);
            rec.epoch = epoch;
            loss_sum += rec.total;
            ++batch_count;
            ++ckpt.step;
            if (on_step) on_step(rec);
        }
        ckpt.epoch = epoch + 1;
        if (on_epoch) {
            EpochRecord er;
            er.epoch = epoch;
            er.mean_loss = batch_count ? loss_sum / static_cast<double>(batch_count) : 0.0;
            er.val_species_macro = val_species_macro(dataset, ckpt.params, cfg);
            on_epoch(er);
        }
        if (epoch == stop_after_epoch) break;
    }
    return ckpt;
}

// ---------------------------------------------------------------------------
// checkpoint I/O
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[] = "HYPTAXCKPT\n";
constexpr int kFormatVersion = 1;

void append_array_dir(json& dir, const std::string& name, const Tensor& t) {
    dir.push_back({{"name", name}, {"rows", t.rows}, {"cols", t.cols}});
}

void write_doubles(std::ofstream& out, const Tensor& t) {
    out.write(reinterpret_cast<const char*>(t.data.data()),
              static_cast<std::streamsize>(t.data.size() * sizeof(double)));
}

Tensor read_doubles(std::ifstream& in, int rows, int cols) {
    Tensor t(rows, cols);
    in.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<std::streamsize>(t.data.size() * sizeof(double)));
    if (!in) throw DataError("checkpoint: truncated array data");
    return t;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    json dir = json::array();
    for (const auto& [name, t] : ckpt.params.tensors) append_array_dir(dir, name, t);
    for (const auto& [name, t] : ckpt.opt.m) append_array_dir(dir, "adam_m:" + name, t);
    for (const auto& [name, t] : ckpt.opt.v) append_array_dir(dir, "adam_v:" + name, t);

    json header;
    header["format_version"] = kFormatVersion;
    header["config"] = json::parse(train_config_to_json(ckpt.config));
    header["epoch"] = ckpt.epoch;
    header["step"] = ckpt.step;
    header["adam_t"] = ckpt.opt.t;
    header["rng_state"] = std::to_string(ckpt.rng_state);
    header["arrays"] = dir;
    const std::string header_str = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint '" + path + "'");
    out.write(kMagic, sizeof(kMagic) - 1);
    const std::uint64_t len = header_str.size();
    unsigned char len_bytes[8];
    for (int i = 0; i < 8; ++i) len_bytes[i] = static_cast<unsigned char>((len >> (8 * i)) & 0xFF);
    out.write(reinterpret_cast<const char*>(len_bytes), 8);
    out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
    for (const auto& [name, t] : ckpt.params.tensors) write_doubles(out, t);
    for (const auto& [name, t] : ckpt.opt.m) write_doubles(out, t);
    for (const auto& [name, t] : ckpt.opt.v) write_doubles(out, t);
    if (!out) throw DataError("write failed for checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint '" + path + "'");

    char magic[sizeof(kMagic) - 1];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
        throw DataError("checkpoint '" + path + "': bad magic header");
    }
    unsigned char len_bytes[8];
    in.read(reinterpret_cast<char*>(len_bytes), 8);
    if (!in) throw DataError("checkpoint '" + path + "': truncated header length");
    std::uint64_t len = 0;
    for (int i = 0; i < 8; ++i) len |= static_cast<std::uint64_t>(len_bytes[i]) << (8 * i);

    std::string header_str(len, '\0');
    in.read(header_str.data(), static_cast<std::streamsize>(len));
    if (!in) throw DataError("checkpoint '" + path + "': truncated JSON header");

    json header;
    try {
        header = json::parse(header_str);
    } catch (const json::exception& e) {
        throw DataError("checkpoint '" + path + "': corrupt JSON header: " + e.what());
    }
    if (header.at("format_version").get<int>() != kFormatVersion) {
        throw DataError("checkpoint '" + path + "': unsupported format version " +
                        std::to_string(header.at("format_version").get<int>()));
    }

    Checkpoint ckpt;
    ckpt.format_version = kFormatVersion;
    ckpt.config = train_config_from_json(header.at("config").dump());
    ckpt.epoch = header.at("epoch").get<int>();
    ckpt.step = header.at("step").get<long>();
    ckpt.opt.t = header.at("adam_t").get<long>();
    ckpt.rng_state = std::stoull(header.at("rng_state").get<std::string>());

    for (const json& entry : header.at("arrays")) {
        const std::string name = entry.at("name").get<std::string>();
        Tensor t = read_doubles(in, entry.at("rows").get<int>(), entry.at("cols").get<int>());
        if (name.rfind("adam_m:", 0) == 0) {
            ckpt.opt.m.emplace(name.substr(7), std::move(t));
        } else if (name.rfind("adam_v:", 0) == 0) {
            ckpt.opt.v.emplace(name.substr(7), std::move(t));
        } else {
            ckpt.params.tensors.emplace(name, std::move(t));
        }
    }
    return ckpt;
}

}  // namespace hyptax::train

// Copyright (C) 2026 hyptax authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hyptax/config_io.hpp"
#include "hyptax/dataset.hpp"
#include "hyptax/errors.hpp"
#include "hyptax/evaluator.hpp"
#include "hyptax/grad_check.hpp"
#include "hyptax/losses.hpp"
#include "hyptax/rng.hpp"
#include "hyptax/trainer.hpp"

namespace {

using namespace hyptax;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

std::string format_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << content;
    if (!out) throw DataError("write failed for '" + path + "'");
}

int run_gen_data(const std::string& config_path, const std::string& out_path,
                 std::optional<std::uint64_t> seed) {
    data::SynthSpec spec = load_synth_spec(config_path);
    if (seed) spec.seed = *seed;
    const data::Dataset ds = data::generate_synthetic(spec);
    data::write_tsv(out_path, ds.records);
    std::cout << "wrote " << ds.records.size() << " records ("
              << spec.species_count() << " species) to " << out_path << "\n";
    return kExitOk;
}

int run_train(const std::string& config_path, const std::string& data_path,
              const std::string& out_path, const std::string& log_path,
              std::optional<std::uint64_t> seed, std::optional<int> epochs) {
    train::TrainConfig cfg = load_train_config(config_path);
    if (seed) cfg.seed = *seed;
    if (epochs) cfg.epochs = *epochs;
    cfg.validate();

    const data::Dataset ds = data::load_tsv(data_path);

    std::ofstream log;
    if (!log_path.empty()) {
        log.open(log_path, std::ios::binary);
        if (!log) throw DataError("cannot write '" + log_path + "'");
        log << "epoch,step,lr,total,contrastive,entailment,sel_intra,sel_inter,"
               "temperature\n";
    }
    auto on_step = [&](const train::StepRecord& rec) {
        if (!log.is_open()) return;
        auto component = [&rec](const char* name) -> std::string {
            for (const auto& [n, v] : rec.components) {
                if (n == name) return format_g(v);
            }
            return "";
        };
        log << rec.epoch << ',' << rec.step << ',' << format_g(rec.lr) << ','
            << format_g(rec.total) << ',' << component("contrastive") << ','
            << component("entailment") << ',' << component("sel_intra") << ','
            << component("sel_inter") << ',' << format_g(rec.temperature) << '\n';
    };
    auto on_epoch = [](const train::EpochRecord& rec) {
        std::cout << "epoch " << rec.epoch << ": mean loss " << rec.mean_loss;
        if (rec.val_species_macro) {
            std::cout << ", val species macro " << *rec.val_species_macro;
        }
        std::cout << "\n";
    };

    const train::Checkpoint ckpt = train::train(ds, cfg, nullptr, on_step, on_epoch);
    train::save_checkpoint(out_path, ckpt);
    std::cout << "checkpoint written to " << out_path << "\n";
    return kExitOk;
}

int run_eval(const std::string& data_path, const std::string& ckpt_path,
             const std::string& out_path, const std::string& csv_path, int threads) {
    const train::Checkpoint ckpt = train::load_checkpoint(ckpt_path);
    const data::Dataset ds = data::load_tsv(data_path);
    const auto embeddings = train::encode_records(ds.records, ckpt.params, ckpt.config);

    eval::EvalOptions options;
    options.threads = threads;
    options.manifold = ckpt.config.loss.manifold;
    const eval::EvalReport report = eval::evaluate_all(ds, embeddings, options);

    write_file(out_path, report.to_json());
    if (!csv_path.empty()) write_file(csv_path, report.to_csv());
    std::cout << "report written to " << out_path << "\n";
    return kExitOk;
}

int run_embed(const std::string& data_path, const std::string& ckpt_path,
              const std::string& out_path) {
    const train::Checkpoint ckpt = train::load_checkpoint(ckpt_path);
    const data::Dataset ds = data::load_tsv(data_path);

    std::ostringstream out;
    const int d = ckpt.config.d;
    out << "id";
    for (const char* mod : {"img", "dna", "text"}) {
        for (int j = 0; j <= d; ++j) out << ',' << mod << '_' << j;
    }
    out << '\n';

    const auto embeddings = train::encode_records(ds.records, ckpt.params, ckpt.config);
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        const int dr = ds.records[i].deepest_rank();
        if (dr < 0) {
            throw DataError("embed: record '" + ds.records[i].id +
                            "' has no taxonomic label");
        }
        const losses::SpecimenEmbeddings& emb = embeddings[i];
        const manifold::LorentzPoint& text = *emb.ranks.by_rank[dr];
        out << ds.records[i].id;
        for (const manifold::LorentzPoint* p : {&emb.image, &emb.dna, &text}) {
            out << ',' << format_g(p->time);
            for (double x : p->space) out << ',' << format_g(x);
        }
        out << '\n';
    }
    write_file(out_path, out.str());
    std::cout << "embeddings written to " << out_path << "\n";
    return kExitOk;
}

int run_grad_check(const std::string& config_path, std::optional<std::uint64_t> seed,
                   const std::string& out_path, int batch_size) {
    train::TrainConfig cfg = load_train_config(config_path);
    if (seed) cfg.seed = *seed;
    cfg.validate();

    // small self-contained random batch over a two-way tree
    data::SynthSpec spec;
    spec.branching = {2, 2, 2, 1};
    spec.specimens_per_species = (batch_size + 7) / 8;
    spec.d_in = cfg.d_in;
    spec.noise_sigma = 0.3;
    spec.unseen_fraction = 0.0;
    spec.seed = cfg.seed;
    const data::Dataset ds = data::generate_synthetic(spec);

    std::vector<int> batch;
    for (std::size_t i = 0; i < ds.records.size() && static_cast<int>(batch.size()) < batch_size; ++i) {
        batch.push_back(static_cast<int>(i));
    }

    const autodiff::ParamMap params = train::init_params(cfg).tensors;
    const data::BatchMeta meta = data::build_batch_meta(ds.records, batch, ds.taxonomy);
    auto builder = [&](autodiff::Graph& g,
                       const std::map<std::string, autodiff::Var>& vars) {
        losses::EncodedBatch emb = train::encode_batch(g, vars, ds.records, batch, cfg);
        return losses::total_loss(emb, meta, vars.at("log_temp"), cfg.loss).total;
    };
    const autodiff::GradCheckReport report = autodiff::check_gradient(builder, params);

    nlohmann::json obj;
    obj["max_relative_error"] = report.max_relative_error;
    nlohmann::json per = nlohmann::json::object();
    for (const auto& [name, err] : report.per_param) per[name] = err;
    obj["per_parameter"] = per;
    const std::string text = obj.dump(2) + "\n";
    if (!out_path.empty()) {
        write_file(out_path, text);
    } else {
        std::cout << text;
    }

    if (!(report.max_relative_error < 1e-4)) {
        std::cerr << "gradient check failed: max relative error "
                  << report.max_relative_error << " >= 1e-4\n";
        return kExitNumeric;
    }
    std::cout << "gradient check passed: max relative error "
              << report.max_relative_error << "\n";
    return kExitOk;
}

int run_report_hm(const std::string& in_path, const std::string& out_path) {
    std::ifstream in(in_path);
    if (!in) throw DataError("cannot open '" + in_path + "'");
    std::ostringstream out;
    out << "seen,unseen,hm\n";
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string a, b;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b)) {
            throw DataError("line " + std::to_string(line_no) +
                            ": expected 'seen,unseen'");
        }
        if (line_no == 1 && (a == "seen" || a == "Seen")) continue;  // header
        double seen = 0.0, unseen = 0.0;
        try {
            seen = std::stod(a);
            unseen = std::stod(b);
        } catch (const std::exception&) {
            throw DataError("line " + std::to_string(line_no) + ": malformed pair '" +
                            line + "'");
        }
        char buf[96];
        std::snprintf(buf, sizeof buf, "%.6g,%.6g,%.6g\n", seen, unseen,
                      eval::harmonic_mean(seen, unseen));
        out << buf;
    }
    if (!out_path.empty()) {
        write_file(out_path, out.str());
    } else {
        std::cout << out.str();
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hyptax: hyperbolic multimodal taxonomy embeddings"};
    app.require_subcommand(1);

    std::string config_path, data_path, ckpt_path, out_path, csv_path, log_path, in_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> epochs;
    int threads = 1;
    int batch_size = 8;

    CLI::App* gen = app.add_subcommand("gen-data", "generate a synthetic dataset (TSV)");
    gen->add_option("--config", config_path, "SynthSpec JSON")->required();
    gen->add_option("--out", out_path, "output TSV path")->required();
    gen->add_option("--seed", seed, "seed override");

    CLI::App* tr = app.add_subcommand("train", "train encoders on a dataset");
    tr->add_option("--config", config_path, "TrainConfig JSON")->required();
    tr->add_option("--data", data_path, "dataset TSV")->required();
    tr->add_option("--out", out_path, "output checkpoint path")->required();
    tr->add_option("--log", log_path, "per-step loss log CSV");
    tr->add_option("--seed", seed, "seed override");
    tr->add_option("--epochs", epochs, "epoch count override");
    tr->add_option("--threads", threads, "worker threads (training math is single-threaded)");

    CLI::App* ev = app.add_subcommand("eval", "run the retrieval protocol");
    ev->add_option("--data", data_path, "dataset TSV")->required();
    ev->add_option("--ckpt", ckpt_path, "checkpoint path")->required();
    ev->add_option("--out", out_path, "report JSON path")->required();
    ev->add_option("--csv", csv_path, "also write a CSV flattening");
    ev->add_option("--threads", threads, "retrieval worker threads");

    CLI::App* em = app.add_subcommand("embed", "dump per-record embeddings (CSV)");
    em->add_option("--data", data_path, "dataset TSV")->required();
    em->add_option("--ckpt", ckpt_path, "checkpoint path")->required();
    em->add_option("--out", out_path, "output CSV path")->required();

    CLI::App* gc = app.add_subcommand("grad-check",
                                      "finite-difference check of the configured loss");
    gc->add_option("--config", config_path, "TrainConfig JSON")->required();
    gc->add_option("--seed", seed, "seed override");
    gc->add_option("--out", out_path, "report JSON path (default: stdout)");
    gc->add_option("--batch-size", batch_size, "probe batch size");

    CLI::App* hm = app.add_subcommand("report-hm",
                                      "harmonic means for a CSV of seen,unseen pairs");
    hm->add_option("--in", in_path, "input CSV of seen,unseen pairs")->required();
    hm->add_option("--out", out_path, "output CSV path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (gen->parsed()) return run_gen_data(config_path, out_path, seed);
        if (tr->parsed()) {
            return run_train(config_path, data_path, out_path, log_path, seed, epochs);
        }
        if (ev->parsed()) return run_eval(data_path, ckpt_path, out_path, csv_path, threads);
        if (em->parsed()) return run_embed(data_path, ckpt_path, out_path);
        if (gc->parsed()) return run_grad_check(config_path, seed, out_path, batch_size);
        if (hm->parsed()) return run_report_hm(in_path, out_path);
        std::cerr << "no subcommand\n";
        return kExitUsage;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
}

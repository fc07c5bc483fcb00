// Copyright (C) 2026 hyptax authors
// SPDX-License-Identifier: Apache-2.0

#include "hyptax/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "hyptax/errors.hpp"

namespace hyptax::eval {

using nlohmann::json;

const std::vector<RetrievalTask>& retrieval_tasks() {
    static const std::vector<RetrievalTask> tasks = {
        {Modality::dna, Modality::dna, "DNA-to-DNA"},
        {Modality::image, Modality::image, "Image-to-Image"},
        {Modality::image, Modality::dna, "Image-to-DNA"},
    };
    return tasks;
}

std::vector<int> nearest_key_indices(const std::vector<LorentzPoint>& queries,
                                     const std::vector<LorentzPoint>& keys,
                                     const ManifoldConfig& mcfg,
                                     const std::vector<int>* self_key_of_query,
                                     int threads) {
    if (keys.empty()) {
        throw std::invalid_argument("nearest_key_indices: empty key set");
    }
    std::vector<int> best(queries.size(), -1);

    auto worker = [&](std::size_t begin, std::size_t end) {
        for (std::size_t q = begin; q < end; ++q) {
            const int skip =
                self_key_of_query ? (*self_key_of_query)[q] : -1;
            double best_dist = 0.0;
            int best_idx = -1;
            for (std::size_t k = 0; k < keys.size(); ++k) {
                if (static_cast<int>(k) == skip) continue;
                const double d = manifold::geodesic_distance(queries[q], keys[k], mcfg);
                if (best_idx < 0 || d < best_dist) {  // ties keep the lowest index
                    best_dist = d;
                    best_idx = static_cast<int>(k);
                }
            }
            best[q] = best_idx;
        }
    };

    if (threads <= 1 || queries.size() < 2) {
        worker(0, queries.size());
    } else {
        const std::size_t n_threads =
            std::min<std::size_t>(threads, queries.size());
        std::vector<std::thread> pool;
        const std::size_t chunk = (queries.size() + n_threads - 1) / n_threads;
        for (std::size_t t = 0; t < n_threads; ++t) {
            const std::size_t begin = t * chunk;
            const std::size_t end = std::min(queries.size(), begin + chunk);
            if (begin >= end) break;
            pool.emplace_back(worker, begin, end);
        }
        for (std::thread& th : pool) th.join();
    }
    return best;
}

std::vector<std::string> retrieve_top1(const std::vector<LorentzPoint>& queries,
                                       const std::vector<LorentzPoint>& keys,
                                       const std::vector<std::string>& key_labels,
                                       const ManifoldConfig& mcfg,
                                       const std::vector<int>* self_key_of_query,
                                       int threads) {
    if (keys.size() != key_labels.size()) {
        throw std::invalid_argument("retrieve_top1: one label per key required");
    }
    const std::vector<int> idx =
        nearest_key_indices(queries, keys, mcfg, self_key_of_query, threads);
    std::vector<std::string> out;
    out.reserve(idx.size());
    for (int k : idx) out.push_back(k >= 0 ? key_labels[k] : std::string());
    return out;
}

double accuracy_macro(const std::vector<std::string>& preds,
                      const std::vector<std::string>& truths,
                      const std::unordered_set<std::string>& classes) {
    if (preds.size() != truths.size()) {
        throw std::invalid_argument("accuracy_macro: size mismatch");
    }
    std::map<std::string, std::pair<long, long>> per_class;  // correct, total
    for (std::size_t i = 0; i < truths.size(); ++i) {
        if (!classes.count(truths[i])) continue;
        auto& [correct, total] = per_class[truths[i]];
        ++total;
        if (preds[i] == truths[i]) ++correct;
    }
    if (per_class.empty()) {
        throw std::invalid_argument("accuracy_macro: no queries in the given classes");
    }
    double sum = 0.0;
    for (const auto& [cls, counts] : per_class) {
        sum += static_cast<double>(counts.first) / static_cast<double>(counts.second);
    }
    return sum / static_cast<double>(per_class.size());
}

double accuracy_micro(const std::vector<std::string>& preds,
                      const std::vector<std::string>& truths) {
    if (preds.size() != truths.size()) {
        throw std::invalid_argument("accuracy_micro: size mismatch");
    }
    if (truths.empty()) throw std::invalid_argument("accuracy_micro: empty input");
    long correct = 0;
    for (std::size_t i = 0; i < truths.size(); ++i) {
        if (preds[i] == truths[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(truths.size());
}

double harmonic_mean(double seen, double unseen) {
    if (!(seen >= 0.0 && unseen >= 0.0)) {
        throw std::invalid_argument("harmonic_mean: inputs must be >= 0");
    }
    if (seen == 0.0 && unseen == 0.0) return 0.0;
    return 2.0 * seen * unseen / (seen + unseen);
}

// ---------------------------------------------------------------------------
// report assembly
// ---------------------------------------------------------------------------

namespace {

const LorentzPoint& modality_point(const losses::SpecimenEmbeddings& emb, Modality m) {
    return m == Modality::image ? emb.image : emb.dna;
}

std::optional<double> hm_cell(const std::optional<double>& seen,
                              const std::optional<double>& unseen) {
    if (!seen || !unseen) return std::nullopt;
    if (*seen == 0.0 && *unseen == 0.0) return std::nullopt;  // 0/0 undefined
    return harmonic_mean(*seen, *unseen);
}

json cell_to_json(const std::optional<double>& v) {
    if (!v) return nullptr;
    return std::round(*v * 1e6) / 1e6;
}

std::string cell_to_csv(const std::optional<double>& v) {
    if (!v) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", *v);
    return buf;
}

}  // namespace

EvalReport evaluate_all(const data::Dataset& dataset,
                        const std::vector<losses::SpecimenEmbeddings>& embeddings,
                        const EvalOptions& options) {
    if (embeddings.size() != dataset.records.size()) {
        throw std::invalid_argument("evaluate_all: one embedding per record required");
    }

    std::vector<int> query_idx, key_idx;
    for (std::size_t i = 0; i < dataset.records.size(); ++i) {
        switch (dataset.records[i].split) {
            case data::Split::test_seen:
            case data::Split::test_unseen:
                query_idx.push_back(static_cast<int>(i));
                break;
            case data::Split::train_seen:
            case data::Split::key:
                key_idx.push_back(static_cast<int>(i));
                break;
            default:
                break;
        }
    }
    if (query_idx.empty()) {
        throw DataError("evaluate_all: missing split: no test_seen or test_unseen records");
    }
    if (key_idx.empty()) {
        throw DataError("evaluate_all: missing split: no train_seen or key records");
    }

    EvalReport report;
    for (const RetrievalTask& task : retrieval_tasks()) {
        std::vector<LorentzPoint> queries, keys;
        queries.reserve(query_idx.size());
        keys.reserve(key_idx.size());
        for (int i : query_idx) queries.push_back(modality_point(embeddings[i], task.query));
        for (int i : key_idx) keys.push_back(modality_point(embeddings[i], task.key));

        const std::vector<int> nearest =
            nearest_key_indices(queries, keys, options.manifold, nullptr, options.threads);

        for (int rank = 0; rank < data::kNumRanks; ++rank) {
            const auto [seen_classes, unseen_classes] =
                data::split_seen_unseen(dataset.records, rank);

            std::vector<std::string> preds_seen, truths_seen;
            std::vector<std::string> preds_unseen, truths_unseen;
            for (std::size_t q = 0; q < queries.size(); ++q) {
                const data::SpecimenRecord& rec = dataset.records[query_idx[q]];
                if (!rec.has_rank(rank)) continue;
                const std::string truth = rec.class_key(rank);
                const data::SpecimenRecord& key_rec =
                    dataset.records[key_idx[nearest[q]]];
                const std::string pred =
                    key_rec.has_rank(rank) ? key_rec.class_key(rank) : std::string();
                if (seen_classes.count(truth)) {
                    preds_seen.push_back(pred);
                    truths_seen.push_back(truth);
                } else {
                    preds_unseen.push_back(pred);
                    truths_unseen.push_back(truth);
                }
            }

            EvalEntry entry;
            if (!truths_seen.empty()) {
                entry.seen.macro = accuracy_macro(
                    preds_seen, truths_seen, {truths_seen.begin(), truths_seen.end()});
                entry.seen.micro = accuracy_micro(preds_seen, truths_seen);
            }
            if (!truths_unseen.empty()) {
                entry.unseen.macro =
                    accuracy_macro(preds_unseen, truths_unseen,
                                   {truths_unseen.begin(), truths_unseen.end()});
                entry.unseen.micro = accuracy_micro(preds_unseen, truths_unseen);
            }
            entry.hm.macro = hm_cell(entry.seen.macro, entry.unseen.macro);
            entry.hm.micro = hm_cell(entry.seen.micro, entry.unseen.micro);
            report.table[rank][task.name] = entry;
        }
    }
    return report;
}

std::string EvalReport::to_json() const {
    json root = json::object();
    for (int rank = 0; rank < data::kNumRanks; ++rank) {
        json rank_obj = json::object();
        for (const auto& [task, entry] : table[rank]) {
            rank_obj[task] = {
                {"seen",
                 {{"macro", cell_to_json(entry.seen.macro)},
                  {"micro", cell_to_json(entry.seen.micro)}}},
                {"unseen",
                 {{"macro", cell_to_json(entry.unseen.macro)},
                  {"micro", cell_to_json(entry.unseen.micro)}}},
                {"hm",
                 {{"macro", cell_to_json(entry.hm.macro)},
                  {"micro", cell_to_json(entry.hm.micro)}}},
            };
        }
        root[data::kRankNames[rank]] = rank_obj;
    }
    return root.dump(2) + "\n";
}

std::string EvalReport::to_csv() const {
    std::string out =
        "rank,task,seen_macro,unseen_macro,hm_macro,seen_micro,unseen_micro,hm_micro\n";
    for (int rank = 0; rank < data::kNumRanks; ++rank) {
        for (const auto& [task, entry] : table[rank]) {
            out += data::kRankNames[rank];
            out += ',' + task;
            out += ',' + cell_to_csv(entry.seen.macro);
            out += ',' + cell_to_csv(entry.unseen.macro);
            out += ',' + cell_to_csv(entry.hm.macro);
            out += ',' + cell_to_csv(entry.seen.micro);
            out += ',' + cell_to_csv(entry.unseen.micro);
            out += ',' + cell_to_csv(entry.hm.micro);
            out += '\n';
        }
    }
    return out;
}

}  // namespace hyptax::eval

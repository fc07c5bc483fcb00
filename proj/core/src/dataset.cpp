// Copyright (C) 2026 hyptax authors
// SPDX-License-Identifier: Apache-2.0

#include "hyptax/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hyptax/errors.hpp"
#include "hyptax/rng.hpp"

namespace hyptax::data {

const std::array<std::string, kNumRanks> kRankNames = {"order", "family", "genus",
                                                       "species"};

namespace {

const std::array<std::string, 5> kSplitNames = {"train_seen", "val", "test_seen",
                                                "test_unseen", "key"};

constexpr char kHeader[] =
    "id\tsplit\torder\tfamily\tgenus\tspecies\timg_feat\tdna_feat";

// Per-rank prototype offset scales: coarse ranks move prototypes further.
constexpr double kProtoScale[kNumRanks] = {2.0, 1.0, 0.5, 0.25};

std::vector<std::string> split_on(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

double parse_double(const std::string& tok, int line_no, const char* field) {
    double v = 0.0;
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || tok.empty()) {
        throw DataError("line " + std::to_string(line_no) + ": malformed float '" +
                        tok + "' in " + field);
    }
    return v;
}

std::vector<double> parse_features(const std::string& cell, int line_no,
                                   const char* field) {
    std::vector<double> out;
    for (const std::string& tok : split_on(cell, ';')) {
        out.push_back(parse_double(tok, line_no, field));
    }
    return out;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

Split parse_split(const std::string& s) {
    for (std::size_t i = 0; i < kSplitNames.size(); ++i) {
        if (kSplitNames[i] == s) return static_cast<Split>(i);
    }
    throw DataError("unknown split '" + s + "'");
}

const std::string& split_name(Split s) { return kSplitNames[static_cast<int>(s)]; }

int SpecimenRecord::deepest_rank() const {
    for (int r = kNumRanks - 1; r >= 0; --r) {
        if (labels[r]) return r;
    }
    return -1;
}

std::string SpecimenRecord::class_key(int r) const {
    if (!labels[r]) return {};
    std::string key;
    for (int i = 0; i <= r; ++i) {
        if (!labels[i]) continue;
        if (!key.empty()) key += '/';
        key += *labels[i];
    }
    return key;
}

std::string SpecimenRecord::path_text(int r) const {
    std::string text;
    for (int i = 0; i <= r; ++i) {
        if (!labels[i]) continue;
        if (!text.empty()) text += ' ';
        text += *labels[i];
    }
    return text;
}

int TaxonomyIndex::id_at(int rank, const std::string& key) const {
    const auto it = class_id[rank].find(key);
    return it == class_id[rank].end() ? -1 : it->second;
}

TaxonomyIndex build_taxonomy(const std::vector<SpecimenRecord>& records) {
    TaxonomyIndex idx;

    // Bare-label parent consistency: the same child label under two different
    // parent labels is a data error, even though class identity is path-based.
    std::array<std::unordered_map<std::string, std::string>, kNumRanks> bare_parent;
    for (const SpecimenRecord& rec : records) {
        for (int r = 1; r < kNumRanks; ++r) {
            if (!rec.labels[r]) continue;
            int pr = r - 1;
            while (pr >= 0 && !rec.labels[pr]) --pr;
            if (pr < 0) continue;
            const std::string& child = *rec.labels[r];
            const std::string& parent = *rec.labels[pr];
            auto [it, inserted] = bare_parent[r].emplace(child, parent);
            if (!inserted && it->second != parent) {
                throw DataError(kRankNames[r] + " '" + child +
                                "' maps to two different parents: '" + it->second +
                                "' and '" + parent + "'");
            }
        }
    }

    for (const SpecimenRecord& rec : records) {
        for (int r = 0; r < kNumRanks; ++r) {
            if (!rec.labels[r]) continue;
            const std::string key = rec.class_key(r);
            auto [it, inserted] = idx.class_id[r].emplace(key, idx.classes[r].size());
            if (inserted) {
                idx.classes[r].push_back(key);
                idx.class_text[r].push_back(rec.path_text(r));
                idx.parent_of[r].push_back(-1);
            }
            if (r > 0) {
                int pr = r - 1;
                while (pr >= 0 && !rec.labels[pr]) --pr;
                if (pr == r - 1) {
                    idx.parent_of[r][it->second] = idx.id_at(pr, rec.class_key(pr));
                }
            }
        }
        if (rec.split == Split::train_seen && rec.labels[kNumRanks - 1]) {
            idx.seen_species.insert(rec.class_key(kNumRanks - 1));
        }
    }
    return idx;
}

Dataset load_tsv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty file");
    if (line != kHeader) {
        throw DataError(path + ": line 1: header does not match the specimen schema");
    }

    Dataset ds;
    std::unordered_map<std::string, int> seen_ids;
    std::array<std::unordered_map<std::string, std::pair<std::string, int>>, kNumRanks>
        bare_parent;  // child label -> (parent label, line)
    std::size_t feat_width = 0;

    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::vector<std::string> cells = split_on(line, '\t');
        if (cells.size() != 8) {
            throw DataError("line " + std::to_string(line_no) + ": expected 8 fields, got " +
                            std::to_string(cells.size()));
        }

        SpecimenRecord rec;
        rec.id = cells[0];
        if (rec.id.empty()) {
            throw DataError("line " + std::to_string(line_no) + ": empty id");
        }
        auto [it, inserted] = seen_ids.emplace(rec.id, line_no);
        if (!inserted) {
            throw DataError("line " + std::to_string(line_no) + ": duplicate id '" +
                            rec.id + "' (first seen on line " +
                            std::to_string(it->second) + ")");
        }
        try {
            rec.split = parse_split(cells[1]);
        } catch (const DataError& e) {
            throw DataError("line " + std::to_string(line_no) + ": " + e.what());
        }
        for (int r = 0; r < kNumRanks; ++r) {
            if (!cells[2 + r].empty()) rec.labels[r] = cells[2 + r];
        }
        rec.img_feat = parse_features(cells[6], line_no, "img_feat");
        rec.dna_feat = parse_features(cells[7], line_no, "dna_feat");
        if (feat_width == 0) feat_width = rec.img_feat.size();
        if (rec.img_feat.size() != feat_width || rec.dna_feat.size() != feat_width) {
            throw DataError("line " + std::to_string(line_no) +
                            ": feature width differs from the rest of the file");
        }

        // two-parents validation with line attribution
        for (int r = 1; r < kNumRanks; ++r) {
            if (!rec.labels[r]) continue;
            int pr = r - 1;
            while (pr >= 0 && !rec.labels[pr]) --pr;
            if (pr < 0) continue;
            const std::string& child = *rec.labels[r];
            const std::string& parent = *rec.labels[pr];
            auto [pit, pinserted] = bare_parent[r].emplace(child, std::make_pair(parent, line_no));
            if (!pinserted && pit->second.first != parent) {
                throw DataError("line " + std::to_string(line_no) + ": " + kRankNames[r] +
                                " '" + child + "' maps to parent '" + parent +
                                "' but was '" + pit->second.first + "' on line " +
                                std::to_string(pit->second.second));
            }
        }

        ds.records.push_back(std::move(rec));
    }

    ds.taxonomy = build_taxonomy(ds.records);
    return ds;
}

void write_tsv(const std::string& path, const std::vector<SpecimenRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << kHeader << '\n';
    for (const SpecimenRecord& rec : records) {
        out << rec.id << '\t' << split_name(rec.split);
        for (int r = 0; r < kNumRanks; ++r) {
            out << '\t' << (rec.labels[r] ? *rec.labels[r] : "");
        }
        for (const std::vector<double>* feat : {&rec.img_feat, &rec.dna_feat}) {
            out << '\t';
            for (std::size_t i = 0; i < feat->size(); ++i) {
                if (i) out << ';';
                out << format_double((*feat)[i]);
            }
        }
        out << '\n';
    }
    if (!out) throw DataError("write failed for '" + path + "'");
}

void SynthSpec::validate() const {
    if (static_cast<int>(branching.size()) != kNumRanks) {
        throw std::invalid_argument("SynthSpec: branching must list " +
                                    std::to_string(kNumRanks) + " ranks");
    }
    for (int b : branching) {
        if (b < 1) throw std::invalid_argument("SynthSpec: branching factors must be >= 1");
    }
    if (specimens_per_species < 1) {
        throw std::invalid_argument("SynthSpec: specimens_per_species must be >= 1");
    }
    if (d_in < 1) throw std::invalid_argument("SynthSpec: d_in must be >= 1");
    if (!(noise_sigma >= 0.0)) {
        throw std::invalid_argument("SynthSpec: noise_sigma must be >= 0");
    }
    if (!(unseen_fraction >= 0.0 && unseen_fraction < 1.0)) {
        throw std::invalid_argument("SynthSpec: unseen_fraction must be in [0, 1)");
    }
}

int SynthSpec::species_count() const {
    int n = 1;
    for (int b : branching) n *= b;
    return n;
}

namespace {

struct SynthSpecies {
    std::array<std::string, kNumRanks> labels;
    std::vector<double> prototype;
};

void expand_tree(const SynthSpec& spec, Rng& rng, int rank,
                 std::array<std::string, kNumRanks>& labels, std::string index_path,
                 const std::vector<double>& parent_proto, std::vector<SynthSpecies>& out) {
    static const char* kPrefix[kNumRanks] = {"ord", "fam", "gen", "spe"};
    for (int child = 0; child < spec.branching[rank]; ++child) {
        const std::string child_path =
            index_path.empty() ? std::to_string(child + 1)
                               : index_path + "_" + std::to_string(child + 1);
        labels[rank] = std::string(kPrefix[rank]) + child_path;
        std::vector<double> proto = parent_proto;
        for (double& x : proto) x += kProtoScale[rank] * rng.gaussian();
        if (rank + 1 == kNumRanks) {
            out.push_back(SynthSpecies{labels, proto});
        } else {
            expand_tree(spec, rng, rank + 1, labels, child_path, proto, out);
        }
    }
}

std::vector<double> apply_map(const std::vector<double>& m, const std::vector<double>& x) {
    const std::size_t d = x.size();
    std::vector<double> y(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) s += m[i * d + j] * x[j];
        y[i] = s;
    }
    return y;
}

}  // namespace

Dataset generate_synthetic(const SynthSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);

    std::vector<SynthSpecies> species;
    std::array<std::string, kNumRanks> labels;
    expand_tree(spec, rng, 0, labels, "", std::vector<double>(spec.d_in, 0.0), species);

    const double map_scale = 1.0 / std::sqrt(static_cast<double>(spec.d_in));
    const std::vector<double> a_img =
        rng.gaussians(static_cast<std::size_t>(spec.d_in) * spec.d_in, map_scale);
    const std::vector<double> a_dna =
        rng.gaussians(static_cast<std::size_t>(spec.d_in) * spec.d_in, map_scale);

    const int n_species = static_cast<int>(species.size());
    const int n_unseen = static_cast<int>(spec.unseen_fraction * n_species);
    std::vector<int> order(n_species);
    for (int i = 0; i < n_species; ++i) order[i] = i;
    rng.shuffle(order);
    std::vector<bool> unseen(n_species, false);
    for (int i = 0; i < n_unseen; ++i) unseen[order[i]] = true;

    Dataset ds;
    int serial = 0;
    for (int s = 0; s < n_species; ++s) {
        const int n = spec.specimens_per_species;
        std::vector<Split> splits(n);
        if (unseen[s]) {
            const int n_key = std::max(1, n / 2);
            for (int i = 0; i < n; ++i) {
                splits[i] = i < n_key ? Split::key : Split::test_unseen;
            }
        } else {
            const int n_train = std::max(1, 7 * n / 10);
            const int n_val = (n - n_train >= 2) ? std::max(1, n / 10) : 0;
            for (int i = 0; i < n; ++i) {
                splits[i] = i < n_train               ? Split::train_seen
                            : i < n_train + n_val     ? Split::val
                                                      : Split::test_seen;
            }
        }
        for (int i = 0; i < n; ++i) {
            SpecimenRecord rec;
            char buf[16];
            std::snprintf(buf, sizeof buf, "s%06d", serial++);
            rec.id = buf;
            rec.split = splits[i];
            for (int r = 0; r < kNumRanks; ++r) rec.labels[r] = species[s].labels[r];

            std::vector<double> noisy_img = species[s].prototype;
            for (double& x : noisy_img) x += spec.noise_sigma * rng.gaussian();
            std::vector<double> noisy_dna = species[s].prototype;
            for (double& x : noisy_dna) x += spec.noise_sigma * rng.gaussian();
            rec.img_feat = apply_map(a_img, noisy_img);
            rec.dna_feat = apply_map(a_dna, noisy_dna);
            ds.records.push_back(std::move(rec));
        }
    }
    ds.taxonomy = build_taxonomy(ds.records);
    return ds;
}

std::string build_full_text_key(
    const std::array<std::optional<std::string>, kNumRanks>& labels) {
    std::string text;
    for (int r = 0; r < kNumRanks; ++r) {
        if (!labels[r]) continue;
        if (!text.empty()) text += ' ';
        text += *labels[r];
    }
    if (text.empty()) {
        throw std::invalid_argument("build_full_text_key: no labels present");
    }
    return text;
}

std::vector<std::vector<int>> make_batches(std::size_t record_count, int batch_size,
                                           std::uint64_t seed, int epoch) {
    if (batch_size < 2) {
        throw std::invalid_argument("make_batches: batch_size must be >= 2");
    }
    std::vector<int> idx(record_count);
    for (std::size_t i = 0; i < record_count; ++i) idx[i] = static_cast<int>(i);
    Rng rng(mix64(seed) ^ mix64(static_cast<std::uint64_t>(epoch) + 0x5851F42D4C957F2DULL));
    rng.shuffle(idx);

    std::vector<std::vector<int>> batches;
    for (std::size_t start = 0; start < idx.size(); start += batch_size) {
        const std::size_t end = std::min(idx.size(), start + batch_size);
        batches.emplace_back(idx.begin() + start, idx.begin() + end);
    }
    return batches;
}

BatchMeta build_batch_meta(const std::vector<SpecimenRecord>& records,
                           const std::vector<int>& batch,
                           const TaxonomyIndex& taxonomy) {
    BatchMeta meta;
    meta.batch_size = static_cast<int>(batch.size());
    for (int r = 0; r < kNumRanks; ++r) meta.rank_class[r].assign(batch.size(), -1);
    meta.deepest_class.assign(batch.size(), -1);
    meta.deepest_rank.assign(batch.size(), -1);

    std::unordered_map<std::string, int> deepest_intern;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const SpecimenRecord& rec = records[batch[i]];
        for (int r = 0; r < kNumRanks; ++r) {
            if (rec.has_rank(r)) {
                meta.rank_class[r][i] = taxonomy.id_at(r, rec.class_key(r));
            }
        }
        const int dr = rec.deepest_rank();
        meta.deepest_rank[i] = dr;
        if (dr >= 0) {
            const std::string key = std::to_string(dr) + ':' + rec.class_key(dr);
            auto [it, inserted] = deepest_intern.emplace(key, deepest_intern.size());
            meta.deepest_class[i] = it->second;
        }
    }
    return meta;
}

std::pair<std::unordered_set<std::string>, std::unordered_set<std::string>>
split_seen_unseen(const std::vector<SpecimenRecord>& records, int rank) {
    if (rank < 0 || rank >= kNumRanks) {
        throw std::invalid_argument("split_seen_unseen: rank out of range");
    }
    std::unordered_set<std::string> seen;
    std::unordered_set<std::string> occurring;
    for (const SpecimenRecord& rec : records) {
        if (!rec.has_rank(rank)) continue;
        if (rec.split == Split::train_seen) seen.insert(rec.class_key(rank));
        if (rec.split == Split::test_seen || rec.split == Split::test_unseen) {
            occurring.insert(rec.class_key(rank));
        }
    }
    std::unordered_set<std::string> unseen;
    for (const std::string& key : occurring) {
        if (!seen.count(key)) unseen.insert(key);
    }
    return {std::move(seen), std::move(unseen)};
}

}  // namespace hyptax::data

// This file is part of the gaitdiff project, a silhouette-domain video
// diffusion toolkit for gait sequence synthesis and evaluation.
//
// Copyright 2026 the gaitdiff authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "eval/gbs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "core/errors.hpp"

namespace fs = std::filesystem;

namespace gaitdiff {

EmbeddingVector GeiEmbedder::embed(const SilhouetteSequence& seq) const {
    if (seq.frames.rank() != 3 || seq.frames.numel() == 0)
        throw param_error("gei: empty or malformed sequence");
    const int64_t frames = seq.frames.dim(0);
    const int64_t pixels = seq.frames.dim(1) * seq.frames.dim(2);

    EmbeddingVector e;
    e.source_sequence_id = seq.sequence_id;
    e.identity_index = seq.identity_index;
    e.values.assign(static_cast<size_t>(pixels), 0.0);
    for (int64_t f = 0; f < frames; ++f) {
        const float* src = seq.frames.data() + f * pixels;
        for (int64_t i = 0; i < pixels; ++i) e.values[static_cast<size_t>(i)] += src[i];
    }
    double norm = 0;
    for (auto& v : e.values) {
        v /= static_cast<double>(frames);
        norm += v * v;
    }
    norm = std::sqrt(norm);
    if (norm == 0.0) {
        e.degenerate_norm = true;  // all-black clip: keep the zero vector
        return e;
    }
    for (auto& v : e.values) v /= norm;
    return e;
}

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw shape_error("cosine: dimension mismatch");
    double dot = 0, na = 0, nb = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) throw param_error("cosine: zero-norm vector");
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

namespace {

std::vector<int> sorted_distinct_ids(const std::vector<EmbeddingVector>& es) {
    std::set<int> ids;
    for (const auto& e : es) ids.insert(e.identity_index);
    return {ids.begin(), ids.end()};
}

}  // namespace

GbsReport gbs(const std::vector<EmbeddingVector>& real, const std::vector<EmbeddingVector>& synthetic,
              const std::string& embedder_name, GbsPairing pairing) {
    if (real.empty() || synthetic.empty()) throw param_error("gbs: both sets must be nonempty");

    GbsReport report;
    report.embedder_name = embedder_name;

    // Identity pairing: map each synthetic id to a real id.
    std::map<int, int> synth_to_real;
    const auto real_ids = sorted_distinct_ids(real);
    const auto synth_ids = sorted_distinct_ids(synthetic);
    if (pairing == GbsPairing::same_identity) {
        std::set<int> real_set(real_ids.begin(), real_ids.end());
        std::string missing;
        for (int id : synth_ids) {
            if (real_set.count(id))
                synth_to_real[id] = id;
            else
                missing += (missing.empty() ? "" : ", ") + std::to_string(id);
        }
        if (!missing.empty())
            throw validation_error("gbs: synthetic identities absent from the real set: " + missing);
    } else {
        if (synth_ids.size() > real_ids.size())
            throw validation_error("gbs: more synthetic identities (" +
                                   std::to_string(synth_ids.size()) + ") than real (" +
                                   std::to_string(real_ids.size()) + ") under matched_ids pairing");
        for (size_t k = 0; k < synth_ids.size(); ++k) synth_to_real[synth_ids[k]] = real_ids[k];
    }

    // Real centroids per identity (zero-norm embeddings excluded).
    std::map<int, std::vector<double>> centroid;
    std::map<int, int> centroid_n;
    for (const auto& e : real) {
        if (e.degenerate_norm) {
            ++report.excluded_zero_norm;
            continue;
        }
        auto& c = centroid[e.identity_index];
        if (c.empty()) c.assign(e.values.size(), 0.0);
        for (size_t i = 0; i < e.values.size(); ++i) c[i] += e.values[i];
        ++centroid_n[e.identity_index];
    }
    for (auto& [id, c] : centroid)
        for (auto& v : c) v /= centroid_n[id];

    std::map<int, double> per_id_sum;
    std::map<int, int> per_id_n;
    double total = 0;
    for (const auto& e : synthetic) {
        if (e.degenerate_norm) {
            ++report.excluded_zero_norm;
            continue;
        }
        const int rid = synth_to_real.at(e.identity_index);
        auto it = centroid.find(rid);
        if (it == centroid.end() || it->second.empty()) {
            ++report.excluded_zero_norm;
            continue;
        }
        const double s = cosine_similarity(e.values, it->second);
        total += s;
        per_id_sum[e.identity_index] += s;
        ++per_id_n[e.identity_index];
        ++report.pair_count;
    }
    if (report.pair_count == 0)
        throw validation_error("gbs: no valid pairs (all embeddings degenerate?)");

    report.overall_score = total / report.pair_count;
    for (const auto& [id, s] : per_id_sum) report.per_identity[id] = s / per_id_n[id];
    return report;
}

GbsReport gbs(const std::vector<SilhouetteSequence>& real,
              const std::vector<SilhouetteSequence>& synthetic, const Embedder& embedder,
              GbsPairing pairing) {
    std::vector<EmbeddingVector> er, es;
    er.reserve(real.size());
    es.reserve(synthetic.size());
    for (const auto& s : real) er.push_back(embedder.embed(s));
    for (const auto& s : synthetic) es.push_back(embedder.embed(s));
    return gbs(er, es, embedder.name(), pairing);
}

void write_embedding_table(const std::string& path, std::vector<EmbeddingVector> embeddings) {
    if (embeddings.empty()) throw param_error("embedding table: nothing to write");
    std::sort(embeddings.begin(), embeddings.end(),
              [](const auto& a, const auto& b) { return a.source_sequence_id < b.source_sequence_id; });
    const size_t dim = embeddings.front().values.size();

    std::ofstream f(path, std::ios::trunc);
    if (!f) throw io_error("cannot write embedding table: " + path);
    f << "sequence_id\tidentity_index\tis_synthetic";
    for (size_t i = 0; i < dim; ++i) f << "\td" << i;
    f << "\n";
    char buf[64];
    for (const auto& e : embeddings) {
        if (e.values.size() != dim) throw shape_error("embedding table: inconsistent dimensions");
        f << e.source_sequence_id << "\t" << e.identity_index << "\t" << (e.is_synthetic ? 1 : 0);
        for (double v : e.values) {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            f << "\t" << buf;
        }
        f << "\n";
    }
}

std::vector<EmbeddingVector> read_embedding_table(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw io_error("cannot open embedding table: " + path);
    std::string line;
    if (!std::getline(f, line)) throw parse_error("embedding table is empty: " + path);

    std::vector<EmbeddingVector> out;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string tok;
        EmbeddingVector e;
        if (!std::getline(ss, e.source_sequence_id, '\t'))
            throw parse_error("embedding table row missing sequence_id");
        if (!std::getline(ss, tok, '\t')) throw parse_error("embedding table row missing identity");
        e.identity_index = std::stoi(tok);
        if (!std::getline(ss, tok, '\t')) throw parse_error("embedding table row missing flag");
        e.is_synthetic = tok == "1";
        while (std::getline(ss, tok, '\t')) e.values.push_back(std::stod(tok));
        double norm = 0;
        for (double v : e.values) norm += v * v;
        e.degenerate_norm = norm == 0.0;
        out.push_back(std::move(e));
    }
    if (out.empty()) throw parse_error("embedding table has no rows: " + path);
    return out;
}

std::vector<EmbeddingVector> embed_manifest(const DatasetManifest& manifest,
                                            const Embedder& embedder) {
    if (manifest.entries.empty()) throw validation_error("embed: empty manifest");
    std::vector<EmbeddingVector> out;
    out.reserve(manifest.entries.size());
    for (const auto& entry : manifest.entries) {
        SilhouetteSequence seq =
            load_sequence(manifest, entry.sequence_id, entry.frame_count, 0);
        EmbeddingVector e = embedder.embed(seq);
        e.is_synthetic = entry.synthetic;
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<EmbeddingVector> export_embeddings(const DatasetManifest& manifest,
                                               const Embedder& embedder,
                                               const std::string& out_path) {
    auto es = embed_manifest(manifest, embedder);
    write_embedding_table(out_path, es);
    return read_embedding_table(out_path);
}

std::vector<EmbeddingVector> external_embeddings(const std::string& command,
                                                 const std::string& dataset_root) {
    const fs::path table = fs::path(dataset_root) / "external_embeddings.tsv";
    std::error_code ec;
    fs::remove(table, ec);
    const std::string cmd = command + " \"" + dataset_root + "\" \"" + table.string() + "\"";
    const int rc = std::system(cmd.c_str());
    if (rc != 0)
        throw io_error("external embedder failed (exit " + std::to_string(rc) + "): " + cmd);
    if (!fs::exists(table))
        throw io_error("external embedder produced no table at " + table.string());
    return read_embedding_table(table.string());
}

std::vector<EmbeddingVector> embeddings_for_spec(const DatasetManifest& manifest,
                                                 const std::string& spec) {
    if (spec == "gei" || spec.empty()) return embed_manifest(manifest, GeiEmbedder());
    if (spec.rfind("cmd:", 0) == 0) return external_embeddings(spec.substr(4), manifest.root_path);
    throw param_error("unknown embedder spec '" + spec + "' (use \"gei\" or \"cmd:<command>\")");
}

std::string embedder_display_name(const std::string& spec) {
    if (spec == "gei" || spec.empty()) return "gei";
    if (spec.rfind("cmd:", 0) == 0) return "external:" + spec.substr(4);
    return spec;
}

}  // namespace gaitdiff

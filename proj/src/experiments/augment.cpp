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

#include "experiments/augment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#include <json.hpp>

#include "core/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace gaitdiff {

AugmentationMode augmentation_mode_from_string(const std::string& s) {
    if (s == "original_ids") return AugmentationMode::original_ids;
    if (s == "novel_ids") return AugmentationMode::novel_ids;
    if (s == "combined") return AugmentationMode::combined;
    if (s == "synthetic_only") return AugmentationMode::synthetic_only;
    throw param_error("unknown augmentation mode: " + s);
}

std::string to_string(AugmentationMode m) {
    switch (m) {
        case AugmentationMode::original_ids: return "original_ids";
        case AugmentationMode::novel_ids: return "novel_ids";
        case AugmentationMode::combined: return "combined";
        case AugmentationMode::synthetic_only: return "synthetic_only";
    }
    return "?";
}

std::vector<std::pair<int, int>> default_mixing_pairs(int n_original) {
    if (n_original < 2) throw param_error("mixing pairs need n_original >= 2");
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i + 1 < n_original; ++i) pairs.emplace_back(i, i + 1);
    return pairs;
}

PlanCardinality plan_cardinality(const AugmentationPlan& plan, int n_views, int n_covariates) {
    if (plan.n_original < 1) throw param_error("plan: n_original must be >= 1");
    if (plan.variations_per_setting < 1) throw param_error("plan: variations must be >= 1");
    const int vw = plan.views.empty() ? n_views : static_cast<int>(plan.views.size());
    const int cv = plan.covariates.empty() ? n_covariates : static_cast<int>(plan.covariates.size());
    if (vw < 1 || cv < 1) throw param_error("plan: empty view/covariate vocabulary");

    const int n_pairs = plan.id_mixing_pairs.empty()
                            ? (plan.n_original >= 2 ? plan.n_original - 1 : 0)
                            : static_cast<int>(plan.id_mixing_pairs.size());

    PlanCardinality c;
    switch (plan.mode) {
        case AugmentationMode::original_ids:
        case AugmentationMode::synthetic_only:
            c.original_ids = plan.n_original;
            c.novel_ids = 0;
            break;
        case AugmentationMode::novel_ids:
            c.original_ids = 0;
            c.novel_ids = n_pairs;
            break;
        case AugmentationMode::combined:
            c.original_ids = plan.n_original;
            c.novel_ids = n_pairs;
            break;
    }
    c.total_ids = c.original_ids + c.novel_ids;
    c.sequences = static_cast<int64_t>(c.total_ids) * vw * cv * plan.variations_per_setting;
    return c;
}

namespace {

std::string pad3(int v) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%03d", v);
    return buf;
}

uint64_t job_seed(uint64_t seed, uint64_t id_key, uint64_t view, uint64_t cov, uint64_t var) {
    uint64_t k = mix_streams(seed, 0xA06Dull);
    k = mix_streams(k, id_key);
    k = mix_streams(k, view);
    k = mix_streams(k, cov);
    k = mix_streams(k, var);
    return k;
}

struct GenJob {
    IdentityVector identity;
    int out_identity = 0;
    uint64_t id_key = 0;
    bool synthetic_identity = false;  // mixed / novel
};

}  // namespace

DatasetManifest build_augmentation(const Denoiser& model, const NoiseSchedule& sched,
                                   const AugmentationPlan& plan, uint64_t seed,
                                   const std::string& out_dir, const std::string& checkpoint_hash) {
    const int model_ids = model.config.n_ids;
    const int n_original = plan.n_original == 0 ? model_ids : plan.n_original;
    if (n_original < 1 || n_original > model_ids)
        throw param_error("plan: n_original " + std::to_string(n_original) +
                          " outside the checkpoint's identity vocabulary (" +
                          std::to_string(model_ids) + ")");
    AugmentationPlan resolved = plan;
    resolved.n_original = n_original;

    const std::vector<std::string>& views =
        resolved.views.empty() ? model.cond.views : resolved.views;
    const std::vector<std::string>& covs =
        resolved.covariates.empty() ? model.cond.covariates : resolved.covariates;
    for (const auto& v : views) model.cond.view_index(v);
    for (const auto& c : covs) model.cond.covariate_index(c);

    std::vector<std::pair<int, int>> pairs = resolved.id_mixing_pairs;
    const bool wants_novel = resolved.mode == AugmentationMode::novel_ids ||
                             resolved.mode == AugmentationMode::combined;
    if (wants_novel && pairs.empty()) pairs = default_mixing_pairs(n_original);
    for (const auto& [a, b] : pairs)
        if (a < 0 || b < 0 || a >= model_ids || b >= model_ids || a == b)
            throw param_error("plan: invalid mixing pair (" + std::to_string(a) + ", " +
                              std::to_string(b) + ")");

    // Assemble the identity jobs in manifest order.
    std::vector<GenJob> jobs;
    const bool wants_original = resolved.mode != AugmentationMode::novel_ids;
    int next_index = 0;
    if (wants_original) {
        for (int id = 0; id < n_original; ++id) {
            GenJob j;
            j.identity = make_identity(id, model_ids);
            j.out_identity = next_index++;
            j.id_key = static_cast<uint64_t>(id);
            j.synthetic_identity = false;
            jobs.push_back(std::move(j));
        }
    }
    if (wants_novel) {
        for (const auto& [a, b] : pairs) {
            GenJob j;
            j.identity = mix_identities({a, b}, model_ids, false);
            j.out_identity = next_index++;
            j.id_key = 0x4000000ull + static_cast<uint64_t>(a) * 100000ull + b;
            j.synthetic_identity = true;
            jobs.push_back(std::move(j));
        }
    }

    DatasetManifest out;
    out.root_path = out_dir;
    out.n_ids = next_index;
    out.views = views;
    out.covariates = covs;
    std::sort(out.views.begin(), out.views.end());
    std::sort(out.covariates.begin(), out.covariates.end());

    for (const auto& job : jobs) {
        for (size_t vi = 0; vi < views.size(); ++vi) {
            for (size_t ci = 0; ci < covs.size(); ++ci) {
                for (int var = 0; var < resolved.variations_per_setting; ++var) {
                    GenerationRequest req;
                    req.bundle.identity = job.identity;
                    req.bundle.view_label = views[vi];
                    req.bundle.covariate_label = covs[ci];
                    req.seed = job_seed(seed, job.id_key, vi, ci, static_cast<uint64_t>(var));
                    req.n_variations = 1;
                    auto res = generate(model, sched, req);
                    if (!res.front().ok)
                        throw numeric_error("augmentation job failed (id " +
                                            std::to_string(job.out_identity) + "): " +
                                            res.front().error);

                    ManifestEntry e;
                    e.identity_index = job.out_identity;
                    e.view_label = views[vi];
                    e.covariate_label = covs[ci];
                    e.frame_count = model.config.clip_length;
                    e.synthetic = true;
                    e.sequence_id =
                        pad3(job.out_identity) + "-" + covs[ci] + "-" + views[vi] + "-" + pad3(var);
                    e.relative_path =
                        (fs::path(pad3(job.out_identity)) / covs[ci] / views[vi] / pad3(var)).string();
                    save_sequence_frames(out_dir, e.relative_path, res.front().sequence.frames);
                    out.entries.push_back(std::move(e));
                }
            }
        }
    }
    save_manifest(out);

    json prov;
    prov["checkpoint_hash"] = checkpoint_hash;
    prov["seed"] = seed;
    prov["plan"] = {{"mode", to_string(resolved.mode)},
                    {"n_original", n_original},
                    {"variations_per_setting", resolved.variations_per_setting},
                    {"views", views},
                    {"covariates", covs}};
    json jp = json::array();
    for (const auto& [a, b] : pairs) jp.push_back({a, b});
    prov["plan"]["id_mixing_pairs"] = jp;
    std::ofstream pf(fs::path(out_dir) / "provenance.json");
    pf << prov.dump(2) << "\n";
    return out;
}

SeedSweepResult seed_sweep(const Denoiser& model, const NoiseSchedule& sched,
                           const ConditionBundle& bundle, const std::vector<uint64_t>& seeds,
                           const std::vector<EmbeddingVector>* reference) {
    if (seeds.size() < 2) throw param_error("seed_sweep: need at least 2 seeds");

    SeedSweepResult out;
    out.seeds = seeds;
    for (uint64_t s : seeds) {
        GenerationRequest req;
        req.bundle = bundle;
        req.seed = s;
        req.n_variations = 1;
        auto res = generate(model, sched, req);
        if (!res.front().ok) throw numeric_error("seed_sweep generation failed: " + res.front().error);
        out.clips.push_back(std::move(res.front().sequence));
    }

    for (size_t i = 0; i < out.clips.size(); ++i) {
        for (size_t j = i + 1; j < out.clips.size(); ++j) {
            const auto& a = out.clips[i].frames;
            const auto& b = out.clips[j].frames;
            double sum = 0;
            for (int64_t k = 0; k < a.numel(); ++k)
                sum += std::abs(static_cast<double>(a[k]) - static_cast<double>(b[k]));
            out.pairwise_diff.emplace_back(static_cast<int>(i), static_cast<int>(j),
                                           sum / static_cast<double>(a.numel()));
        }
    }

    if (reference) {
        GeiEmbedder gei;
        for (const auto& clip : out.clips) {
            std::vector<EmbeddingVector> synth{gei.embed(clip)};
            out.per_seed_gbs.push_back(
                gbs(*reference, synth, gei.name(), GbsPairing::same_identity).overall_score);
        }
    }
    return out;
}

SplitMode split_mode_from_string(const std::string& s) {
    if (s == "closed_set") return SplitMode::closed_set;
    if (s == "open_set") return SplitMode::open_set;
    throw param_error("unknown split mode: " + s + " (closed_set | open_set)");
}

DatasetManifest split_manifest(const DatasetManifest& manifest, SplitMode mode, double fraction,
                               uint64_t seed, const std::string& out_manifest_path) {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw param_error("split: fraction must be in (0, 1]");

    DatasetManifest out;
    out.root_path = manifest.root_path;
    out.views = manifest.views;
    out.covariates = manifest.covariates;

    Rng rng = Rng::stream(seed, 0x5917ull);
    if (mode == SplitMode::closed_set) {
        out.n_ids = manifest.n_ids;
        for (int id = 0; id < manifest.n_ids; ++id) {
            auto idxs = manifest.entries_for_identity(id);
            if (idxs.empty()) continue;
            // Deterministic shuffle, keep a rounded fraction (at least one).
            for (size_t i = idxs.size(); i > 1; --i)
                std::swap(idxs[i - 1], idxs[rng.below(i)]);
            const size_t keep =
                std::max<size_t>(1, static_cast<size_t>(std::lround(fraction * idxs.size())));
            idxs.resize(std::min(keep, idxs.size()));
            std::sort(idxs.begin(), idxs.end());
            for (int k : idxs) out.entries.push_back(manifest.entries[k]);
        }
    } else {
        std::vector<int> ids(manifest.n_ids);
        for (int i = 0; i < manifest.n_ids; ++i) ids[i] = i;
        for (size_t i = ids.size(); i > 1; --i) std::swap(ids[i - 1], ids[rng.below(i)]);
        const size_t keep =
            std::max<size_t>(1, static_cast<size_t>(std::lround(fraction * ids.size())));
        ids.resize(std::min(keep, ids.size()));
        std::sort(ids.begin(), ids.end());
        std::map<int, int> remap;
        for (size_t k = 0; k < ids.size(); ++k) remap[ids[k]] = static_cast<int>(k);
        out.n_ids = static_cast<int>(ids.size());
        for (const auto& e : manifest.entries) {
            auto it = remap.find(e.identity_index);
            if (it == remap.end()) continue;
            ManifestEntry copy = e;
            copy.identity_index = it->second;
            out.entries.push_back(std::move(copy));
        }
    }
    if (out.entries.empty()) throw validation_error("split produced an empty manifest");

    // Write beside the source manifest so relative frame paths stay valid.
    json j;
    j["format"] = "gaitdiff-dataset-v1";
    j["n_ids"] = out.n_ids;
    j["views"] = out.views;
    j["covariates"] = out.covariates;
    j["entries"] = json::array();
    for (const auto& e : out.entries) {
        j["entries"].push_back({{"sequence_id", e.sequence_id},
                                {"identity_index", e.identity_index},
                                {"view", e.view_label},
                                {"covariate", e.covariate_label},
                                {"frame_count", e.frame_count},
                                {"relative_path", e.relative_path},
                                {"synthetic", e.synthetic}});
    }
    std::ofstream f(out_manifest_path);
    if (!f) throw io_error("cannot write split manifest: " + out_manifest_path);
    f << j.dump(2) << "\n";
    return load_dataset(out_manifest_path);
}

std::string file_hash_hex(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot hash missing file: " + path);
    uint64_t h = 1469598103934665603ull;
    char buf[65536];
    while (f.read(buf, sizeof(buf)) || f.gcount() > 0) {
        const std::streamsize n = f.gcount();
        for (std::streamsize i = 0; i < n; ++i)
            h = (h ^ static_cast<uint8_t>(buf[i])) * 1099511628211ull;
        if (!f) break;
    }
    char hex[32];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
    return hex;
}

}  // namespace gaitdiff

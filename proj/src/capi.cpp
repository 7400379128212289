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

#include "gaitdiff.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "config/run_config.hpp"
#include "core/threading.hpp"
#include "data/dataset.hpp"
#include "eval/gbs.hpp"
#include "experiments/augment.hpp"
#include "plot/plot.hpp"
#include "sampler/sampler.hpp"
#include "trainer/checkpoint.hpp"
#include "trainer/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gaitdiff;

namespace {

thread_local std::string t_last_error = "no error";

gd_status fail(const Error& e) {
    t_last_error = e.what();
    return static_cast<gd_status>(static_cast<int>(e.code()));
}

gd_status fail_generic(const std::exception& e) {
    t_last_error = e.what();
    return GD_ERR_INTERNAL;
}

template <typename F>
gd_status guard(F&& f) {
    try {
        f();
        return GD_OK;
    } catch (const Error& e) {
        return fail(e);
    } catch (const json::exception& e) {
        t_last_error = e.what();
        return GD_ERR_PARSE;
    } catch (const std::exception& e) {
        return fail_generic(e);
    }
}

std::vector<std::string> split_csv(const std::string& csv) {
    std::vector<std::string> out;
    std::istringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(tok);
    }
    return out;
}

void copy_out(const std::string& s, char* buf, size_t cap) {
    if (!buf || cap == 0) return;
    const size_t n = std::min(cap - 1, s.size());
    std::memcpy(buf, s.data(), n);
    buf[n] = '\0';
}

GenerationRequest parse_request(const Denoiser& model, const json& j) {
    static const std::set<std::string> known = {"identity",         "mix_ids",  "normalize_mix",
                                                "view",             "covariate", "seed",
                                                "variations",       "export_trajectory",
                                                "binarize_threshold"};
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) throw validation_error("request: unknown key '" + key + "'");

    GenerationRequest req;
    if (j.contains("mix_ids")) {
        const auto ids = j.at("mix_ids").get<std::vector<int>>();
        req.bundle.identity =
            mix_identities(ids, model.config.n_ids, j.value("normalize_mix", false));
    } else if (j.contains("identity")) {
        req.bundle.identity = make_identity(j.at("identity").get<int>(), model.config.n_ids);
    } else {
        throw param_error("request: need \"identity\" or \"mix_ids\"");
    }
    req.bundle.view_label = j.at("view").get<std::string>();
    req.bundle.covariate_label = j.at("covariate").get<std::string>();
    if (!j.contains("seed")) throw param_error("request: \"seed\" is required");
    req.seed = j.at("seed").get<uint64_t>();
    req.n_variations = j.value("variations", 1);
    req.export_trajectory = j.value("export_trajectory", false);
    if (j.contains("binarize_threshold") && !j.at("binarize_threshold").is_null())
        req.binarize_threshold = j.at("binarize_threshold").get<double>();
    return req;
}

std::string pad3(int v) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%03d", v);
    return buf;
}

json gbs_report_to_json(const GbsReport& r, const std::string& pairing) {
    json j;
    j["overall_score"] = r.overall_score;
    j["pair_count"] = r.pair_count;
    j["embedder"] = r.embedder_name;
    j["pairing"] = pairing;
    j["excluded_zero_norm"] = r.excluded_zero_norm;
    json per = json::object();
    for (const auto& [id, s] : r.per_identity) per[std::to_string(id)] = s;
    j["per_identity"] = per;
    return j;
}

}  // namespace

struct gd_manifest {
    DatasetManifest m;
    std::string info;
};

struct gd_model {
    LoadedModel lm;
    std::string info;
    std::string checkpoint_path;
};

extern "C" {

const char* gd_version(void) { return "gaitdiff 1.0.0"; }

const char* gd_last_error(void) { return t_last_error.c_str(); }

void gd_set_threads(int n) { set_compute_threads(n); }

const char* gd_default_config_json(void) {
    static const std::string s = run_config_to_json(default_run_config()).dump(2);
    return s.c_str();
}

gd_status gd_synth_dataset(const char* out_dir, int n_ids, int seqs_per_id, int frames_per_seq,
                           const char* views_csv, const char* covariates_csv, uint64_t seed) {
    return guard([&] {
        if (!out_dir) throw param_error("synth: out_dir is required");
        synthesize_walker_dataset(out_dir, n_ids, seqs_per_id, frames_per_seq,
                                  split_csv(views_csv ? views_csv : "000,090"),
                                  split_csv(covariates_csv ? covariates_csv : "NM"), seed);
    });
}

gd_status gd_manifest_open(const char* manifest_path, gd_manifest** out) {
    return guard([&] {
        if (!manifest_path || !out) throw param_error("manifest_open: null argument");
        auto* h = new gd_manifest{load_dataset(manifest_path), {}};
        *out = h;
    });
}

void gd_manifest_close(gd_manifest* m) { delete m; }

int gd_manifest_num_ids(const gd_manifest* m) { return m ? m->m.n_ids : -1; }

int gd_manifest_num_entries(const gd_manifest* m) {
    return m ? static_cast<int>(m->m.entries.size()) : -1;
}

const char* gd_manifest_info_json(gd_manifest* m) {
    if (!m) return "{}";
    json j;
    j["n_ids"] = m->m.n_ids;
    j["n_entries"] = m->m.entries.size();
    j["views"] = m->m.views;
    j["covariates"] = m->m.covariates;
    j["root_path"] = m->m.root_path;
    m->info = j.dump(2);
    return m->info.c_str();
}

gd_status gd_split_manifest(const char* manifest_path, const char* mode, double fraction,
                            uint64_t seed, const char* out_manifest_path) {
    return guard([&] {
        if (!manifest_path || !mode || !out_manifest_path)
            throw param_error("split: null argument");
        const DatasetManifest m = load_dataset(manifest_path);
        split_manifest(m, split_mode_from_string(mode), fraction, seed, out_manifest_path);
    });
}

gd_status gd_train(const char* config_json, const char* manifest_path, const char* run_dir,
                   const char* resume_checkpoint, char* out_ckpt_path, size_t out_cap) {
    return guard([&] {
        if (!config_json || !manifest_path || !run_dir) throw param_error("train: null argument");
        RunConfig cfg = default_run_config();
        apply_config_json(cfg, json::parse(config_json));
        validate_run_config(cfg);
        const DatasetManifest manifest = load_dataset(manifest_path);
        const std::string path = train(manifest, cfg.train, cfg.model, run_dir,
                                       resume_checkpoint ? resume_checkpoint : "");
        copy_out(path, out_ckpt_path, out_cap);
    });
}

gd_status gd_model_open(const char* checkpoint_path, gd_model** out) {
    return guard([&] {
        if (!checkpoint_path || !out) throw param_error("model_open: null argument");
        auto* h = new gd_model{load_model(checkpoint_path), {}, checkpoint_path};
        *out = h;
    });
}

void gd_model_close(gd_model* m) { delete m; }

const char* gd_model_info_json(gd_model* m) {
    if (!m) return "{}";
    json j;
    j["config"] = denoiser_config_to_json(m->lm.model.config);
    j["schedule"] = {{"timesteps", m->lm.schedule.timesteps},
                     {"beta_start", m->lm.schedule.beta[0]},
                     {"beta_end", m->lm.schedule.beta.back()}};
    j["views"] = m->lm.model.cond.views;
    j["covariates"] = m->lm.model.cond.covariates;
    j["step"] = m->lm.step;
    j["parameters"] = m->lm.model.num_params();
    m->info = j.dump(2);
    return m->info.c_str();
}

gd_status gd_generate(const gd_model* m, const char* request_json, const char* out_dir) {
    return guard([&] {
        if (!m || !request_json || !out_dir) throw param_error("generate: null argument");
        const json j = json::parse(request_json);
        const GenerationRequest req = parse_request(m->lm.model, j);
        const auto results = generate(m->lm.model, m->lm.schedule, req);

        DatasetManifest out;
        out.root_path = out_dir;
        out.n_ids = m->lm.model.config.n_ids;
        out.views = m->lm.model.cond.views;
        out.covariates = m->lm.model.cond.covariates;

        std::string failures;
        for (size_t v = 0; v < results.size(); ++v) {
            const auto& res = results[v];
            if (!res.ok) {
                failures += "variation " + std::to_string(v) + ": " + res.error + "; ";
                continue;
            }
            ManifestEntry e;
            // Mixed identities are not members of the model vocabulary; the
            // output manifest gives them identity 0 of a fresh one-id space.
            const bool mixed = req.bundle.identity.is_mixed;
            e.identity_index = mixed ? 0 : res.sequence.identity_index;
            e.view_label = res.sequence.view_label;
            e.covariate_label = res.sequence.covariate_label;
            e.frame_count = static_cast<int>(res.sequence.clip_length());
            e.synthetic = true;
            e.sequence_id = pad3(e.identity_index) + "-" + e.covariate_label + "-" + e.view_label +
                            "-" + pad3(static_cast<int>(v)) + (mixed ? "-mix" : "");
            e.relative_path = (fs::path(pad3(e.identity_index)) / e.covariate_label / e.view_label /
                               (pad3(static_cast<int>(v)) + std::string(mixed ? "_mix" : "")))
                                  .string();
            save_sequence_frames(out_dir, e.relative_path, res.sequence.frames);
            out.entries.push_back(std::move(e));

            if (req.export_trajectory && !res.trajectory.empty()) {
                const fs::path tdir =
                    fs::path(out_dir) / "trajectory" / ("var" + pad3(static_cast<int>(v)));
                fs::create_directories(tdir);
                for (const auto& [t, snap] : res.trajectory) {
                    Tensor unit = snapshot_to_unit_range(snap);
                    Tensor grid = unit;
                    grid.reshape({static_cast<int64_t>(m->lm.model.config.clip_length),
                                  static_cast<int64_t>(m->lm.model.config.frame_h),
                                  static_cast<int64_t>(m->lm.model.config.frame_w)});
                    save_frame_grid((tdir / ("t" + pad3(t) + ".png")).string(), grid);
                    save_histogram((tdir / ("hist_t" + pad3(t) + ".png")).string(), unit.span(), 50,
                                   0.0, 1.0);
                }
            }
        }
        if (out.entries.empty())
            throw numeric_error("all variations failed: " + failures);
        if (req.bundle.identity.is_mixed) out.n_ids = 1;
        save_manifest(out);
        if (!failures.empty()) throw numeric_error("some variations failed: " + failures);
    });
}

gd_status gd_augment(const gd_model* m, const char* plan_json, uint64_t seed, const char* out_dir) {
    return guard([&] {
        if (!m || !plan_json || !out_dir) throw param_error("augment: null argument");
        RunConfig cfg = default_run_config();
        json wrapper;
        wrapper["augment"] = json::parse(plan_json);
        apply_config_json(cfg, wrapper);
        build_augmentation(m->lm.model, m->lm.schedule, cfg.augment, seed, out_dir,
                           file_hash_hex(m->checkpoint_path));
    });
}

gd_status gd_seed_sweep(const gd_model* m, const char* request_json, const char* seeds_csv,
                        const char* reference_manifest, const char* out_dir) {
    return guard([&] {
        if (!m || !request_json || !seeds_csv || !out_dir)
            throw param_error("seed_sweep: null argument");
        const json j = json::parse(request_json);
        GenerationRequest req = parse_request(m->lm.model, j);

        std::vector<uint64_t> seeds;
        for (const auto& s : split_csv(seeds_csv)) seeds.push_back(std::stoull(s));

        std::vector<EmbeddingVector> reference;
        const std::vector<EmbeddingVector>* ref_ptr = nullptr;
        if (reference_manifest && *reference_manifest) {
            reference = embed_manifest(load_dataset(reference_manifest), GeiEmbedder());
            ref_ptr = &reference;
        }

        const SeedSweepResult result =
            seed_sweep(m->lm.model, m->lm.schedule, req.bundle, seeds, ref_ptr);

        fs::create_directories(out_dir);
        json summary;
        summary["seeds"] = result.seeds;
        json pw = json::array();
        for (const auto& [i, k, d] : result.pairwise_diff)
            pw.push_back({{"i", i}, {"j", k}, {"mean_abs_diff", d}});
        summary["pairwise"] = pw;
        if (!result.per_seed_gbs.empty()) summary["per_seed_gbs"] = result.per_seed_gbs;

        for (size_t i = 0; i < result.clips.size(); ++i) {
            const std::string rel = "seed_" + std::to_string(result.seeds[i]);
            save_sequence_frames(out_dir, rel, result.clips[i].frames);
        }
        std::ofstream f(fs::path(out_dir) / "sweep_summary.json");
        if (!f) throw io_error("cannot write sweep summary");
        f << summary.dump(2) << "\n";
    });
}

gd_status gd_eval_gbs(const char* real_manifest, const char* synthetic_manifest,
                      const char* embedder, const char* pairing, const char* report_path,
                      double* overall_score) {
    return guard([&] {
        if (!real_manifest || !synthetic_manifest) throw param_error("eval_gbs: null argument");
        const std::string spec = embedder ? embedder : "gei";
        const std::string pairing_s = pairing && *pairing ? pairing : "same_identity";
        GbsPairing p;
        if (pairing_s == "same_identity")
            p = GbsPairing::same_identity;
        else if (pairing_s == "matched_ids")
            p = GbsPairing::matched_ids;
        else
            throw param_error("eval_gbs: unknown pairing '" + pairing_s + "'");

        const auto real = embeddings_for_spec(load_dataset(real_manifest), spec);
        const auto synth = embeddings_for_spec(load_dataset(synthetic_manifest), spec);
        const GbsReport report = gbs(real, synth, embedder_display_name(spec), p);

        if (report_path && *report_path) {
            std::ofstream f(report_path);
            if (!f) throw io_error(std::string("cannot write report: ") + report_path);
            f << gbs_report_to_json(report, pairing_s).dump(2) << "\n";
        }
        if (overall_score) *overall_score = report.overall_score;
    });
}

gd_status gd_export_embeddings(const char* manifest_path, const char* embedder,
                               const char* out_path) {
    return guard([&] {
        if (!manifest_path || !out_path) throw param_error("export_embeddings: null argument");
        const DatasetManifest manifest = load_dataset(manifest_path);
        const std::string spec = embedder ? embedder : "gei";
        auto es = embeddings_for_spec(manifest, spec);
        write_embedding_table(out_path, std::move(es));
    });
}

gd_status gd_plot_loss(const char* loss_csv_path, const char* out_png_path) {
    return guard([&] {
        if (!loss_csv_path || !out_png_path) throw param_error("plot_loss: null argument");
        std::ifstream f(loss_csv_path);
        if (!f) throw io_error(std::string("cannot open loss log: ") + loss_csv_path);
        std::string line;
        std::getline(f, line);  // header
        std::vector<double> losses;
        while (std::getline(f, line)) {
            const size_t c1 = line.find(',');
            if (c1 == std::string::npos) continue;
            const size_t c2 = line.find(',', c1 + 1);
            losses.push_back(std::stod(line.substr(c1 + 1, c2 - c1 - 1)));
        }
        save_loss_curve(out_png_path, losses);
    });
}

}  // extern "C"

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

// Command-line front end. Everything of substance happens behind the
// shared library's C API; this file only parses flags, assembles config
// JSON (precedence: built-in defaults < --config file < explicit flags)
// and maps gd_status values to exit codes.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gaitdiff.h"

using nlohmann::json;

namespace {

constexpr const char* kExitCodeTable =
    "Exit codes:\n"
    "  0 success          1 io error          2 parse error\n"
    "  3 validation error 4 bad parameter     5 shape mismatch\n"
    "  6 unknown label    7 numeric failure   8 internal error\n";

int finish(gd_status st) {
    if (st != GD_OK) std::fprintf(stderr, "error[%d]: %s\n", static_cast<int>(st), gd_last_error());
    return static_cast<int>(st);
}

std::string read_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) {
        std::fprintf(stderr, "error[1]: cannot open file: %s\n", path.c_str());
        std::exit(1);
    }
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// Layered config: defaults are applied inside the library; this merges the
// optional config file with explicitly passed flags on top.
struct ConfigLayers {
    std::string config_path;
    json flags = json::object();

    void add_config_option(CLI::App* cmd) {
        const char* env = std::getenv("GAITDIFF_CONFIG");
        if (env) config_path = env;
        cmd->add_option("--config", config_path, "Config file (JSON); see `gaitdiff print-config`")
            ->envname("GAITDIFF_CONFIG");
    }

    void set(const std::string& section, const std::string& key, const json& value) {
        flags[section][key] = value;
    }

    std::string merged() const {
        json out = json::object();
        if (!config_path.empty()) {
            try {
                out = json::parse(read_file(config_path));
            } catch (const json::exception& e) {
                std::fprintf(stderr, "error[2]: config parse failed: %s\n", e.what());
                std::exit(2);
            }
        }
        for (const auto& [section, kv] : flags.items())
            for (const auto& [key, value] : kv.items()) out[section][key] = value;
        return out.dump();
    }
};

void print_file(const std::string& path) {
    std::ifstream f(path);
    if (f) std::cout << f.rdbuf();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gaitdiff - silhouette gait video diffusion toolkit"};
    app.footer(kExitCodeTable);
    app.require_subcommand(1);

    int threads = 0;
    app.add_option("--threads", threads,
                   "Compute threads (0 = auto, 1 = deterministic single-threaded)");

    // ---------------- synth-data ----------------
    auto* synth = app.add_subcommand("synth-data", "Synthesize a procedural walker dataset");
    std::string synth_out, synth_views = "000,090", synth_covs = "NM,BG";
    int synth_ids = 2, synth_seqs = 4, synth_frames = 30;
    uint64_t synth_seed = 0;
    synth->add_option("--out", synth_out, "Output dataset directory")->required();
    synth->add_option("--ids", synth_ids, "Number of identities");
    synth->add_option("--seqs", synth_seqs, "Sequences per identity");
    synth->add_option("--frames", synth_frames, "Frames per sequence");
    synth->add_option("--views", synth_views, "Comma-separated numeric view labels");
    synth->add_option("--covs", synth_covs, "Comma-separated covariate labels (NM/BG/CL)");
    synth->add_option("--seed", synth_seed, "Dataset seed")->required();

    // ---------------- train ----------------
    auto* train = app.add_subcommand("train", "Train the denoiser on a dataset");
    ConfigLayers train_cfg;
    train_cfg.add_config_option(train);
    std::string train_data, train_out, train_resume;
    bool train_plots = false;
    double lr = 0, beta_start = 0, beta_end = 0, grad_clip = 0;
    int batch = 0, clip_length = 0, timesteps = 0, base_dim = 0, heads = 0, res_blocks = 0,
        norm_groups = 0;
    long long steps = 0, ckpt_every = 0;
    uint64_t train_seed = 0;
    std::string mults;
    bool loop_pad = false;
    train->add_option("--data", train_data, "Dataset manifest path")->required();
    train->add_option("--out", train_out, "Run directory (checkpoints + loss.csv)")->required();
    train->add_option("--resume", train_resume, "Checkpoint to resume from");
    auto* o_lr = train->add_option("--lr", lr, "Learning rate");
    auto* o_batch = train->add_option("--batch-size", batch, "Batch size");
    auto* o_steps = train->add_option("--steps", steps, "Total training steps");
    auto* o_seed = train->add_option("--seed", train_seed, "Training seed");
    auto* o_ck = train->add_option("--checkpoint-every", ckpt_every, "Checkpoint interval");
    auto* o_clip = train->add_option("--clip-length", clip_length, "Frames per training clip");
    auto* o_gc = train->add_option("--grad-clip", grad_clip, "Max gradient norm (0 = off)");
    auto* o_lp = train->add_flag("--loop-pad", loop_pad, "Loop-pad sources shorter than the clip");
    auto* o_T = train->add_option("--timesteps", timesteps, "Diffusion steps T");
    auto* o_b0 = train->add_option("--beta-start", beta_start, "Schedule beta at t=0");
    auto* o_b1 = train->add_option("--beta-end", beta_end, "Schedule beta at t=T-1");
    auto* o_dim = train->add_option("--base-dim", base_dim, "Model base width");
    auto* o_mults = train->add_option("--mults", mults, "Channel multipliers, e.g. 1,2,4");
    auto* o_heads = train->add_option("--heads", heads, "Attention heads");
    auto* o_rb = train->add_option("--res-blocks", res_blocks, "Residual blocks per level");
    auto* o_ng = train->add_option("--norm-groups", norm_groups, "Groupnorm groups");
    train->add_flag("--plots", train_plots, "Render loss_curve.png after training");

    // ---------------- generate ----------------
    auto* gen = app.add_subcommand("generate", "Generate clips from a checkpoint");
    std::string gen_model, gen_out, gen_view, gen_cov, gen_mix;
    int gen_id = -1, gen_variations = 1;
    uint64_t gen_seed = 0;
    double gen_binarize = -1;
    bool gen_traj = false, gen_norm_mix = false;
    gen->add_option("--model", gen_model, "Checkpoint path")->required();
    gen->add_option("--out", gen_out, "Output directory")->required();
    gen->add_option("--id", gen_id, "Identity index (pure identity)");
    gen->add_option("--mix-ids", gen_mix, "Comma-separated ids to mix into a novel identity");
    gen->add_option("--view", gen_view, "View label")->required();
    gen->add_option("--cov", gen_cov, "Covariate label")->required();
    gen->add_option("--seed", gen_seed, "Generation seed")->required();
    gen->add_option("--variations", gen_variations, "Variations (independent noise streams)");
    gen->add_flag("--export-trajectory", gen_traj, "Write denoising snapshots/grids");
    gen->add_option("--binarize", gen_binarize, "Binarize threshold in (0,1); off by default");
    gen->add_flag("--normalize-mix", gen_norm_mix, "Convex-combination identity mixing");

    // ---------------- eval-gbs ----------------
    auto* ev = app.add_subcommand("eval-gbs", "Gait biometric similarity between two datasets");
    std::string ev_real, ev_synth, ev_embedder = "gei", ev_pairing = "same_identity", ev_report;
    ev->add_option("--real", ev_real, "Real dataset manifest")->required();
    ev->add_option("--synthetic", ev_synth, "Synthetic dataset manifest")->required();
    ev->add_option("--embedder", ev_embedder, "\"gei\" or \"cmd:<command>\"");
    ev->add_option("--pairing", ev_pairing, "same_identity | matched_ids");
    ev->add_option("--report", ev_report, "Report JSON path (default: print only)");

    // ---------------- augment ----------------
    auto* aug = app.add_subcommand("augment", "Build a synthetic augmentation dataset");
    std::string aug_model, aug_out, aug_mode = "combined", aug_pairs, aug_views, aug_covs;
    int aug_n_original = 0, aug_variations = 5;
    uint64_t aug_seed = 0;
    aug->add_option("--model", aug_model, "Checkpoint path")->required();
    aug->add_option("--out", aug_out, "Output dataset directory")->required();
    aug->add_option("--seed", aug_seed, "Generation seed")->required();
    aug->add_option("--mode", aug_mode, "original_ids | novel_ids | combined | synthetic_only");
    aug->add_option("--n-original", aug_n_original, "Identities to cover (0 = all)");
    aug->add_option("--variations", aug_variations, "Variations per (id, view, covariate)");
    aug->add_option("--pairs", aug_pairs, "Identity mixing pairs, e.g. 0:1,1:2");
    aug->add_option("--views", aug_views, "Restrict to these views (CSV)");
    aug->add_option("--covs", aug_covs, "Restrict to these covariates (CSV)");

    // ---------------- export-embeddings ----------------
    auto* ex = app.add_subcommand("export-embeddings", "Write the embedding table of a dataset");
    std::string ex_data, ex_out, ex_embedder = "gei";
    ex->add_option("--data", ex_data, "Dataset manifest")->required();
    ex->add_option("--out", ex_out, "Output table path")->required();
    ex->add_option("--embedder", ex_embedder, "\"gei\" or \"cmd:<command>\"");

    // ---------------- sweep-seeds ----------------
    auto* sw = app.add_subcommand("sweep-seeds", "Generate one clip per seed and compare them");
    std::string sw_model, sw_out, sw_view, sw_cov, sw_mix, sw_seeds, sw_reference;
    int sw_id = -1;
    sw->add_option("--model", sw_model, "Checkpoint path")->required();
    sw->add_option("--out", sw_out, "Output directory")->required();
    sw->add_option("--seeds", sw_seeds, "Comma-separated seeds (>= 2)")->required();
    sw->add_option("--id", sw_id, "Identity index");
    sw->add_option("--mix-ids", sw_mix, "Comma-separated ids to mix");
    sw->add_option("--view", sw_view, "View label")->required();
    sw->add_option("--cov", sw_cov, "Covariate label")->required();
    sw->add_option("--reference", sw_reference, "Reference manifest for per-seed GBS");

    // ---------------- split-manifest ----------------
    auto* sp = app.add_subcommand("split-manifest", "Closed/open-set subset of a dataset");
    std::string sp_data, sp_mode, sp_out;
    double sp_fraction = 0.2;
    uint64_t sp_seed = 0;
    sp->add_option("--data", sp_data, "Dataset manifest")->required();
    sp->add_option("--mode", sp_mode, "closed_set | open_set")->required();
    sp->add_option("--fraction", sp_fraction, "Fraction to keep");
    sp->add_option("--seed", sp_seed, "Split seed")->required();
    sp->add_option("--out", sp_out, "Output manifest path")->required();

    auto* pc = app.add_subcommand("print-config", "Print the default config JSON");

    CLI11_PARSE(app, argc, argv);
    gd_set_threads(threads);

    if (pc->parsed()) {
        std::cout << gd_default_config_json() << "\n";
        return 0;
    }

    if (synth->parsed()) {
        return finish(gd_synth_dataset(synth_out.c_str(), synth_ids, synth_seqs, synth_frames,
                                       synth_views.c_str(), synth_covs.c_str(), synth_seed));
    }

    if (train->parsed()) {
        if (*o_lr) train_cfg.set("train", "learning_rate", lr);
        if (*o_batch) train_cfg.set("train", "batch_size", batch);
        if (*o_steps) train_cfg.set("train", "total_steps", steps);
        if (*o_seed) train_cfg.set("train", "seed", train_seed);
        if (*o_ck) train_cfg.set("train", "checkpoint_every", ckpt_every);
        if (*o_clip) train_cfg.set("train", "clip_length", clip_length);
        if (*o_gc) train_cfg.set("train", "grad_clip_norm", grad_clip);
        if (*o_lp) train_cfg.set("train", "loop_pad", true);
        if (*o_T) train_cfg.set("schedule", "timesteps", timesteps);
        if (*o_b0) train_cfg.set("schedule", "beta_start", beta_start);
        if (*o_b1) train_cfg.set("schedule", "beta_end", beta_end);
        if (*o_dim) train_cfg.set("model", "base_dim", base_dim);
        if (*o_heads) train_cfg.set("model", "attention_heads", heads);
        if (*o_rb) train_cfg.set("model", "res_blocks_per_level", res_blocks);
        if (*o_ng) train_cfg.set("model", "norm_groups", norm_groups);
        if (*o_mults) {
            std::vector<int> v;
            std::stringstream ss(mults);
            std::string tok;
            while (std::getline(ss, tok, ',')) v.push_back(std::stoi(tok));
            train_cfg.set("model", "channel_mults", v);
        }
        char ckpt[4096] = {0};
        const gd_status st =
            gd_train(train_cfg.merged().c_str(), train_data.c_str(), train_out.c_str(),
                     train_resume.empty() ? nullptr : train_resume.c_str(), ckpt, sizeof(ckpt));
        if (st == GD_OK) {
            std::printf("checkpoint: %s\n", ckpt);
            if (train_plots) {
                const std::string csv = train_out + "/loss.csv";
                const std::string png = train_out + "/loss_curve.png";
                if (gd_plot_loss(csv.c_str(), png.c_str()) == GD_OK)
                    std::printf("loss curve: %s\n", png.c_str());
            }
        }
        return finish(st);
    }

    auto request_json = [](int id, const std::string& mix, const std::string& view,
                           const std::string& cov, uint64_t seed, int variations, bool traj,
                           double binarize, bool norm_mix) {
        json r;
        if (!mix.empty()) {
            std::vector<int> ids;
            std::stringstream ss(mix);
            std::string tok;
            while (std::getline(ss, tok, ',')) ids.push_back(std::stoi(tok));
            r["mix_ids"] = ids;
            if (norm_mix) r["normalize_mix"] = true;
        } else {
            r["identity"] = id;
        }
        r["view"] = view;
        r["covariate"] = cov;
        r["seed"] = seed;
        r["variations"] = variations;
        if (traj) r["export_trajectory"] = true;
        if (binarize > 0) r["binarize_threshold"] = binarize;
        return r.dump();
    };

    if (gen->parsed()) {
        if (gen_id < 0 && gen_mix.empty()) {
            std::fprintf(stderr, "error[4]: generate needs --id or --mix-ids\n");
            return 4;
        }
        gd_model* model = nullptr;
        gd_status st = gd_model_open(gen_model.c_str(), &model);
        if (st != GD_OK) return finish(st);
        const std::string req = request_json(gen_id, gen_mix, gen_view, gen_cov, gen_seed,
                                             gen_variations, gen_traj, gen_binarize, gen_norm_mix);
        st = gd_generate(model, req.c_str(), gen_out.c_str());
        gd_model_close(model);
        if (st == GD_OK) std::printf("generated into %s\n", gen_out.c_str());
        return finish(st);
    }

    if (ev->parsed()) {
        double score = 0;
        const std::string report = ev_report.empty() ? ev_synth + ".gbs.json" : ev_report;
        const gd_status st = gd_eval_gbs(ev_real.c_str(), ev_synth.c_str(), ev_embedder.c_str(),
                                         ev_pairing.c_str(), report.c_str(), &score);
        if (st == GD_OK) {
            print_file(report);
            std::printf("overall_score: %.6f\n", score);
        }
        return finish(st);
    }

    if (aug->parsed()) {
        json plan;
        plan["mode"] = aug_mode;
        plan["n_original"] = aug_n_original;
        plan["variations_per_setting"] = aug_variations;
        if (!aug_pairs.empty()) {
            json pairs = json::array();
            std::stringstream ss(aug_pairs);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                const size_t colon = tok.find(':');
                if (colon == std::string::npos) {
                    std::fprintf(stderr, "error[4]: --pairs entries look like A:B\n");
                    return 4;
                }
                pairs.push_back({std::stoi(tok.substr(0, colon)), std::stoi(tok.substr(colon + 1))});
            }
            plan["id_mixing_pairs"] = pairs;
        }
        auto csv_list = [](const std::string& csv) {
            std::vector<std::string> v;
            std::stringstream ss(csv);
            std::string tok;
            while (std::getline(ss, tok, ','))
                if (!tok.empty()) v.push_back(tok);
            return v;
        };
        if (!aug_views.empty()) plan["views"] = csv_list(aug_views);
        if (!aug_covs.empty()) plan["covariates"] = csv_list(aug_covs);

        gd_model* model = nullptr;
        gd_status st = gd_model_open(aug_model.c_str(), &model);
        if (st != GD_OK) return finish(st);
        st = gd_augment(model, plan.dump().c_str(), aug_seed, aug_out.c_str());
        gd_model_close(model);
        if (st == GD_OK) std::printf("augmented dataset at %s\n", aug_out.c_str());
        return finish(st);
    }

    if (ex->parsed()) {
        const gd_status st =
            gd_export_embeddings(ex_data.c_str(), ex_embedder.c_str(), ex_out.c_str());
        if (st == GD_OK) std::printf("embeddings: %s\n", ex_out.c_str());
        return finish(st);
    }

    if (sw->parsed()) {
        if (sw_id < 0 && sw_mix.empty()) {
            std::fprintf(stderr, "error[4]: sweep-seeds needs --id or --mix-ids\n");
            return 4;
        }
        gd_model* model = nullptr;
        gd_status st = gd_model_open(sw_model.c_str(), &model);
        if (st != GD_OK) return finish(st);
        const std::string req =
            request_json(sw_id, sw_mix, sw_view, sw_cov, /*seed=*/0, 1, false, -1, false);
        st = gd_seed_sweep(model, req.c_str(), sw_seeds.c_str(),
                           sw_reference.empty() ? nullptr : sw_reference.c_str(), sw_out.c_str());
        gd_model_close(model);
        if (st == GD_OK) print_file(sw_out + "/sweep_summary.json");
        return finish(st);
    }

    if (sp->parsed()) {
        return finish(gd_split_manifest(sp_data.c_str(), sp_mode.c_str(), sp_fraction, sp_seed,
                                        sp_out.c_str()));
    }

    return 0;
}

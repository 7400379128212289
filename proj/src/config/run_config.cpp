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

#include "config/run_config.hpp"

#include <set>

#include "experiments/augment.hpp"

using nlohmann::json;

namespace gaitdiff {

RunConfig default_run_config() {
    RunConfig cfg;
    cfg.model.base_dim = 64;
    cfg.model.channel_mults = {1, 2, 4, 8};
    cfg.model.in_channels = 1;
    cfg.model.clip_length = 30;
    cfg.model.frame_h = kFrameHeight;
    cfg.model.frame_w = kFrameWidth;
    cfg.model.attention_heads = 4;
    cfg.model.res_blocks_per_level = 2;
    cfg.model.norm_groups = 8;
    return cfg;  // TrainConfig / AugmentationPlan defaults are in-class
}

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
    if (!j.is_object()) throw validation_error("config: " + where + " must be an object");
    for (const auto& [key, _] : j.items())
        if (!known.count(key))
            throw validation_error("config: unknown key '" + where + "." + key + "'");
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) {
        try {
            out = j.at(key).get<T>();
        } catch (const json::exception& e) {
            throw validation_error(std::string("config: bad value for '") + key + "': " + e.what());
        }
    }
}

}  // namespace

void apply_config_json(RunConfig& cfg, const json& j) {
    reject_unknown(j, {"model", "schedule", "train", "data", "augment"}, "<root>");

    if (j.contains("model")) {
        const json& m = j.at("model");
        reject_unknown(m,
                       {"base_dim", "channel_mults", "in_channels", "attention_heads",
                        "res_blocks_per_level", "norm_groups"},
                       "model");
        maybe(m, "base_dim", cfg.model.base_dim);
        maybe(m, "channel_mults", cfg.model.channel_mults);
        maybe(m, "in_channels", cfg.model.in_channels);
        maybe(m, "attention_heads", cfg.model.attention_heads);
        maybe(m, "res_blocks_per_level", cfg.model.res_blocks_per_level);
        maybe(m, "norm_groups", cfg.model.norm_groups);
    }
    if (j.contains("schedule")) {
        const json& s = j.at("schedule");
        reject_unknown(s, {"timesteps", "beta_start", "beta_end"}, "schedule");
        maybe(s, "timesteps", cfg.train.timesteps);
        maybe(s, "beta_start", cfg.train.beta_start);
        maybe(s, "beta_end", cfg.train.beta_end);
    }
    if (j.contains("train")) {
        const json& t = j.at("train");
        reject_unknown(t,
                       {"learning_rate", "batch_size", "total_steps", "seed", "checkpoint_every",
                        "clip_length", "grad_clip_norm", "loop_pad"},
                       "train");
        maybe(t, "learning_rate", cfg.train.learning_rate);
        maybe(t, "batch_size", cfg.train.batch_size);
        maybe(t, "total_steps", cfg.train.total_steps);
        maybe(t, "seed", cfg.train.seed);
        maybe(t, "checkpoint_every", cfg.train.checkpoint_every);
        maybe(t, "clip_length", cfg.train.clip_length);
        maybe(t, "grad_clip_norm", cfg.train.grad_clip_norm);
        maybe(t, "loop_pad", cfg.train.loop_pad);
        cfg.model.clip_length = cfg.train.clip_length;
    }
    if (j.contains("data")) {
        const json& d = j.at("data");
        reject_unknown(d, {"manifest"}, "data");
        maybe(d, "manifest", cfg.data_manifest);
    }
    if (j.contains("augment")) {
        const json& a = j.at("augment");
        reject_unknown(
            a, {"mode", "n_original", "variations_per_setting", "id_mixing_pairs", "views", "covariates"},
            "augment");
        if (a.contains("mode"))
            cfg.augment.mode = augmentation_mode_from_string(a.at("mode").get<std::string>());
        maybe(a, "n_original", cfg.augment.n_original);
        maybe(a, "variations_per_setting", cfg.augment.variations_per_setting);
        if (a.contains("id_mixing_pairs")) {
            cfg.augment.id_mixing_pairs.clear();
            for (const auto& p : a.at("id_mixing_pairs")) {
                if (!p.is_array() || p.size() != 2)
                    throw validation_error("config: id_mixing_pairs entries must be [a, b]");
                cfg.augment.id_mixing_pairs.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
            }
        }
        maybe(a, "views", cfg.augment.views);
        maybe(a, "covariates", cfg.augment.covariates);
    }
}

json run_config_to_json(const RunConfig& cfg) {
    json j;
    j["model"] = {{"base_dim", cfg.model.base_dim},
                  {"channel_mults", cfg.model.channel_mults},
                  {"in_channels", cfg.model.in_channels},
                  {"attention_heads", cfg.model.attention_heads},
                  {"res_blocks_per_level", cfg.model.res_blocks_per_level},
                  {"norm_groups", cfg.model.norm_groups}};
    j["schedule"] = {{"timesteps", cfg.train.timesteps},
                     {"beta_start", cfg.train.beta_start},
                     {"beta_end", cfg.train.beta_end}};
    j["train"] = {{"learning_rate", cfg.train.learning_rate},
                  {"batch_size", cfg.train.batch_size},
                  {"total_steps", cfg.train.total_steps},
                  {"seed", cfg.train.seed},
                  {"checkpoint_every", cfg.train.checkpoint_every},
                  {"clip_length", cfg.train.clip_length},
                  {"grad_clip_norm", cfg.train.grad_clip_norm},
                  {"loop_pad", cfg.train.loop_pad}};
    j["data"] = {{"manifest", cfg.data_manifest}};
    json pairs = json::array();
    for (const auto& [a, b] : cfg.augment.id_mixing_pairs) pairs.push_back({a, b});
    j["augment"] = {{"mode", to_string(cfg.augment.mode)},
                    {"n_original", cfg.augment.n_original},
                    {"variations_per_setting", cfg.augment.variations_per_setting},
                    {"id_mixing_pairs", pairs},
                    {"views", cfg.augment.views},
                    {"covariates", cfg.augment.covariates}};
    return j;
}

void validate_run_config(const RunConfig& cfg) {
    cfg.train.validate();
    if (cfg.train.beta_start <= 0 || cfg.train.beta_start > cfg.train.beta_end ||
        cfg.train.beta_end >= 1)
        throw validation_error("config: schedule betas must satisfy 0 < start <= end < 1");
    // Model geometry is validated when the model is built (vocab sizes come
    // from the dataset); check the data-independent parts here.
    if (cfg.model.base_dim < 1 || cfg.model.channel_mults.empty())
        throw validation_error("config: model dimensions invalid");
}

}  // namespace gaitdiff

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

#include "trainer/checkpoint.hpp"

#include "core/npz.hpp"

using nlohmann::json;

namespace gaitdiff {

json denoiser_config_to_json(const DenoiserConfig& cfg) {
    json j;
    j["base_dim"] = cfg.base_dim;
    j["channel_mults"] = cfg.channel_mults;
    j["in_channels"] = cfg.in_channels;
    j["clip_length"] = cfg.clip_length;
    j["frame_size"] = {cfg.frame_h, cfg.frame_w};
    j["n_ids"] = cfg.n_ids;
    j["n_views"] = cfg.n_views;
    j["n_covariates"] = cfg.n_covariates;
    j["attention_heads"] = cfg.attention_heads;
    j["res_blocks_per_level"] = cfg.res_blocks_per_level;
    j["norm_groups"] = cfg.norm_groups;
    return j;
}

DenoiserConfig denoiser_config_from_json(const json& j) {
    DenoiserConfig cfg;
    try {
        cfg.base_dim = j.at("base_dim").get<int>();
        cfg.channel_mults = j.at("channel_mults").get<std::vector<int>>();
        cfg.in_channels = j.at("in_channels").get<int>();
        cfg.clip_length = j.at("clip_length").get<int>();
        cfg.frame_h = j.at("frame_size").at(0).get<int>();
        cfg.frame_w = j.at("frame_size").at(1).get<int>();
        cfg.n_ids = j.at("n_ids").get<int>();
        cfg.n_views = j.at("n_views").get<int>();
        cfg.n_covariates = j.at("n_covariates").get<int>();
        cfg.attention_heads = j.at("attention_heads").get<int>();
        cfg.res_blocks_per_level = j.at("res_blocks_per_level").get<int>();
        cfg.norm_groups = j.at("norm_groups").get<int>();
    } catch (const json::exception& e) {
        throw parse_error(std::string("model config: ") + e.what());
    }
    return cfg;
}

void save_checkpoint(const TrainState& state, const std::string& path) {
    NpzWriter w;

    json meta;
    meta["format_version"] = kCheckpointFormatVersion;
    meta["config"] = denoiser_config_to_json(state.model.config);
    meta["schedule"] = {{"timesteps", state.config.timesteps},
                        {"beta_start", state.config.beta_start},
                        {"beta_end", state.config.beta_end}};
    meta["views"] = state.model.cond.views;
    meta["covariates"] = state.model.cond.covariates;
    meta["step"] = state.step;
    meta["train"] = {{"learning_rate", state.config.learning_rate},
                     {"batch_size", state.config.batch_size},
                     {"total_steps", state.config.total_steps},
                     {"seed", state.config.seed},
                     {"checkpoint_every", state.config.checkpoint_every},
                     {"clip_length", state.config.clip_length},
                     {"grad_clip_norm", state.config.grad_clip_norm},
                     {"loop_pad", state.config.loop_pad},
                     {"adam_beta1", state.config.adam_beta1},
                     {"adam_beta2", state.config.adam_beta2},
                     {"adam_eps", state.config.adam_eps}};
    const std::string meta_str = meta.dump();
    w.add_bytes("__meta__", {reinterpret_cast<const uint8_t*>(meta_str.data()), meta_str.size()});

    for (const auto& r : state.model.params)
        w.add_f32("param/" + r.name, r.param->value.span(), r.param->value.shape);

    const auto& m = state.adam.moments_m();
    const auto& v = state.adam.moments_v();
    for (size_t i = 0; i < state.model.params.size(); ++i) {
        const auto& r = state.model.params[i];
        w.add_f32("adam/m/" + r.name, m[i], {static_cast<int64_t>(m[i].size())});
        w.add_f32("adam/v/" + r.name, v[i], {static_cast<int64_t>(v[i].size())});
    }

    const auto rs = state.rng.state();
    w.add_u64("rng_state", {rs.data(), rs.size()});
    w.save(path);
}

namespace {

json read_meta(const NpzReader& r, const std::string& path) {
    const auto bytes = r.read_bytes("__meta__");
    try {
        return json::parse(bytes.begin(), bytes.end());
    } catch (const json::exception& e) {
        throw parse_error("checkpoint meta parse failed: " + path + ": " + e.what());
    }
}

Denoiser rebuild_model(const NpzReader& r, const json& meta, const std::string& path) {
    const int version = meta.at("format_version").get<int>();
    if (version != kCheckpointFormatVersion)
        throw parse_error("checkpoint " + path + " has unsupported format version " +
                          std::to_string(version));
    const DenoiserConfig cfg = denoiser_config_from_json(meta.at("config"));
    const auto views = meta.at("views").get<std::vector<std::string>>();
    const auto covs = meta.at("covariates").get<std::vector<std::string>>();
    Denoiser model = Denoiser::build(cfg, views, covs, 0);
    for (auto& ref : model.params) {
        const std::string key = "param/" + ref.name;
        if (!r.has(key)) throw parse_error("checkpoint missing tensor " + key);
        const auto vals = r.read_f32(key);
        if (static_cast<int64_t>(vals.size()) != ref.param->value.numel())
            throw parse_error("checkpoint tensor " + key + " has wrong element count");
        std::copy(vals.begin(), vals.end(), ref.param->value.v.begin());
    }
    return model;
}

TrainConfig train_config_from_meta(const json& meta) {
    TrainConfig tc;
    const json& sj = meta.at("schedule");
    tc.timesteps = sj.at("timesteps").get<int>();
    tc.beta_start = sj.at("beta_start").get<double>();
    tc.beta_end = sj.at("beta_end").get<double>();
    if (meta.contains("train")) {
        const json& t = meta.at("train");
        tc.learning_rate = t.at("learning_rate").get<double>();
        tc.batch_size = t.at("batch_size").get<int>();
        tc.total_steps = t.at("total_steps").get<int64_t>();
        tc.seed = t.at("seed").get<uint64_t>();
        tc.checkpoint_every = t.at("checkpoint_every").get<int64_t>();
        tc.clip_length = t.at("clip_length").get<int>();
        tc.grad_clip_norm = t.at("grad_clip_norm").get<double>();
        tc.loop_pad = t.at("loop_pad").get<bool>();
        tc.adam_beta1 = t.at("adam_beta1").get<double>();
        tc.adam_beta2 = t.at("adam_beta2").get<double>();
        tc.adam_eps = t.at("adam_eps").get<double>();
    }
    return tc;
}

}  // namespace

TrainState load_checkpoint(const std::string& path) {
    NpzReader r(path);
    const json meta = read_meta(r, path);

    TrainState state;
    state.model = rebuild_model(r, meta, path);
    state.config = train_config_from_meta(meta);
    state.schedule = make_linear_schedule(state.config.timesteps, state.config.beta_start,
                                          state.config.beta_end);
    state.step = meta.at("step").get<int64_t>();

    std::vector<std::vector<float>> m, v;
    m.reserve(state.model.params.size());
    v.reserve(state.model.params.size());
    for (const auto& ref : state.model.params) {
        m.push_back(r.read_f32("adam/m/" + ref.name));
        v.push_back(r.read_f32("adam/v/" + ref.name));
        if (m.back().size() != ref.param->value.v.size() ||
            v.back().size() != ref.param->value.v.size())
            throw parse_error("checkpoint optimizer moments have wrong size for " + ref.name);
    }
    state.adam.attach(state.model.params);
    state.adam.restore(std::move(m), std::move(v), state.step);

    const auto rs = r.read_u64("rng_state");
    if (rs.size() != 4) throw parse_error("checkpoint rng state must have 4 words");
    Rng::State st;
    std::copy(rs.begin(), rs.end(), st.begin());
    state.rng.set_state(st);
    return state;
}

LoadedModel load_model(const std::string& path) {
    NpzReader r(path);
    const json meta = read_meta(r, path);
    LoadedModel out;
    out.model = rebuild_model(r, meta, path);
    const json& sj = meta.at("schedule");
    out.schedule = make_linear_schedule(sj.at("timesteps").get<int>(),
                                        sj.at("beta_start").get<double>(),
                                        sj.at("beta_end").get<double>());
    out.step = meta.at("step").get<int64_t>();
    return out;
}

}  // namespace gaitdiff

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

#include "sampler/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace gaitdiff {

Tensor reverse_step(const Denoiser& model, const Tensor& y_t, int t, const NoiseSchedule& sched,
                    const ConditionTensorsT<float>& cond, const Tensor& z) {
    Tensor biased = y_t;
    add_inplace(biased, cond.input_bias);
    Tensor eps_hat;
    model.unet.forward(biased, t, cond.id_token, eps_hat, nullptr);
    Tensor out(y_t.shape);
    reverse_step_math<float>(y_t.span(), t, eps_hat.span(), sched,
                             t > 0 ? z.span() : std::span<const float>{}, out.span());
    return out;
}

namespace {

std::set<int> trajectory_timesteps(int T, int points) {
    std::set<int> ts;
    const int n = std::max(2, points);
    for (int k = 0; k < n; ++k)
        ts.insert(static_cast<int>(std::lround(static_cast<double>(T) * (n - 1 - k) / (n - 1))));
    return ts;
}

int argmax_weight(const IdentityVector& id) {
    int best = 0;
    for (size_t i = 1; i < id.weights.size(); ++i)
        if (id.weights[i] > id.weights[best]) best = static_cast<int>(i);
    return best;
}

}  // namespace

std::vector<VariationOutput> generate(const Denoiser& model, const NoiseSchedule& sched,
                                      const GenerationRequest& request) {
    if (request.n_variations < 1) throw param_error("generate: n_variations must be >= 1");
    if (request.binarize_threshold &&
        !(*request.binarize_threshold > 0.0 && *request.binarize_threshold < 1.0))
        throw param_error("generate: binarize threshold must lie in (0, 1)");

    const DenoiserConfig& cfg = model.config;
    const int T = sched.timesteps;
    // Vocabulary coverage is checked once up front (throws on unknown labels
    // or identity length mismatch).
    const auto cond = model.cond.build_condition_tensors(request.bundle, cfg.clip_length);
    const std::set<int> traj_ts =
        request.export_trajectory ? trajectory_timesteps(T, request.trajectory_points) : std::set<int>{};

    const int64_t rows = static_cast<int64_t>(cfg.clip_length) * cfg.frame_h * cfg.frame_w;
    std::vector<VariationOutput> results(request.n_variations);

    for (int v = 0; v < request.n_variations; ++v) {
        VariationOutput& res = results[v];
        try {
            Rng rng = Rng::stream(request.seed, 0x9e4eull + static_cast<uint64_t>(v));
            Tensor y({rows, static_cast<int64_t>(cfg.in_channels)});
            rng.fill_normal(y.span());

            if (traj_ts.count(T))
                res.trajectory.emplace_back(T, y);

            Tensor z(y.shape);
            for (int t = T - 1; t >= 0; --t) {
                if (t > 0)
                    rng.fill_normal(z.span());
                else
                    z.zero();
                y = reverse_step(model, y, t, sched, cond, z);
                if (traj_ts.count(t)) res.trajectory.emplace_back(t, y);
            }

            // Postprocess: model range -> [0, 1], clamp, optional binarize.
            SilhouetteSequence& seq = res.sequence;
            seq.frames = Tensor({static_cast<int64_t>(cfg.clip_length),
                                 static_cast<int64_t>(cfg.frame_h),
                                 static_cast<int64_t>(cfg.frame_w)});
            for (int64_t i = 0; i < rows; ++i) {
                float val = (y[i] + 1.0f) / 2.0f;
                val = std::clamp(val, 0.0f, 1.0f);
                if (request.binarize_threshold)
                    val = val >= static_cast<float>(*request.binarize_threshold) ? 1.0f : 0.0f;
                seq.frames[i] = val;
            }
            seq.view_label = request.bundle.view_label;
            seq.covariate_label = request.bundle.covariate_label;
            seq.identity_index =
                request.bundle.identity.is_mixed ? -1 : argmax_weight(request.bundle.identity);
            res.ok = true;
        } catch (const Error& e) {
            res.ok = false;
            res.error = e.what();
        }
    }
    return results;
}

VariationOutput generate_novel(const Denoiser& model, const NoiseSchedule& sched,
                               const std::vector<int>& id_indices, const std::string& view_label,
                               const std::string& covariate_label, uint64_t seed,
                               bool normalize_mix) {
    GenerationRequest req;
    req.bundle.identity = mix_identities(id_indices, model.config.n_ids, normalize_mix);
    req.bundle.view_label = view_label;
    req.bundle.covariate_label = covariate_label;
    req.seed = seed;
    req.n_variations = 1;
    auto out = generate(model, sched, req);
    return out.front();
}

double bimodal_mass(std::span<const float> values) {
    if (values.empty()) return 0.0;
    size_t hits = 0;
    for (float v : values)
        if ((v >= 0.0f && v <= 0.1f) || (v >= 0.9f && v <= 1.0f)) ++hits;
    return static_cast<double>(hits) / static_cast<double>(values.size());
}

Tensor snapshot_to_unit_range(const Tensor& model_range) {
    Tensor out = model_range;
    for (auto& v : out.v) v = (v + 1.0f) / 2.0f;
    return out;
}

}  // namespace gaitdiff

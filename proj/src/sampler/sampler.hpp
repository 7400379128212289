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

#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "conditioning/conditioning.hpp"
#include "data/dataset.hpp"
#include "denoiser/denoiser.hpp"
#include "schedule/schedule.hpp"

namespace gaitdiff {

struct GenerationRequest {
    ConditionBundle bundle;
    uint64_t seed = 0;
    int n_variations = 1;
    bool export_trajectory = false;
    int trajectory_points = 8;
    std::optional<double> binarize_threshold;  // in (0,1) when set
};

/// One denoising step, given the predicted noise:
///   y_{t-1} = (y_t - (1-alpha_t)/sqrt(1-alpha_bar_t) * eps_hat) / sqrt(alpha_t)
///             + sqrt(beta_t) * z
/// Timesteps are 0-based; z must be zero at t == 0 (enforced).
/// The posterior variance is fixed at beta_t: the training loss supervises
/// only the noise prediction, so there is no signal for a learned variance.
template <typename S>
void reverse_step_math(std::span<const S> y_t, int t, std::span<const S> eps_hat,
                       const NoiseSchedule& sched, std::span<const S> z, std::span<S> out) {
    if (t < 0 || t >= sched.timesteps) throw param_error("reverse_step: t out of range");
    if (y_t.size() != eps_hat.size() || y_t.size() != out.size() ||
        (!z.empty() && z.size() != y_t.size()))
        throw shape_error("reverse_step: shape mismatch");
    const double alpha = sched.alpha[t];
    const double inv_sqrt_alpha = 1.0 / std::sqrt(alpha);
    const double eps_coeff = (1.0 - alpha) / std::sqrt(1.0 - sched.alpha_bar[t]);
    const double sigma = t > 0 ? std::sqrt(sched.beta[t]) : 0.0;
    for (size_t i = 0; i < out.size(); ++i) {
        const double mean =
            inv_sqrt_alpha * (static_cast<double>(y_t[i]) - eps_coeff * static_cast<double>(eps_hat[i]));
        const double noise = (sigma != 0.0 && !z.empty()) ? sigma * static_cast<double>(z[i]) : 0.0;
        out[i] = static_cast<S>(mean + noise);
        if (!std::isfinite(static_cast<double>(out[i])))
            throw numeric_error("reverse_step: non-finite value at t=" + std::to_string(t));
    }
}

/// Model-evaluating reverse step: biases the running sample with the
/// condition tensors, queries the denoiser, then applies the closed form
/// above.
Tensor reverse_step(const Denoiser& model, const Tensor& y_t, int t, const NoiseSchedule& sched,
                    const ConditionTensorsT<float>& cond, const Tensor& z);

struct VariationOutput {
    bool ok = false;
    std::string error;
    SilhouetteSequence sequence;                     // postprocessed, values in [0, 1]
    std::vector<std::pair<int, Tensor>> trajectory;  // (timestep, raw model-range snapshot)
};

/// Runs the full reverse chain from unit-normal noise once per variation.
/// Variation v uses the independent noise stream (seed, v), so outputs are
/// reproducible regardless of how variations are scheduled. A numeric
/// failure aborts only its own variation.
std::vector<VariationOutput> generate(const Denoiser& model, const NoiseSchedule& sched,
                                      const GenerationRequest& request);

/// Novel-identity generation: activates several identity entries at once
/// (unnormalized multi-hot by default) and samples a single clip.
VariationOutput generate_novel(const Denoiser& model, const NoiseSchedule& sched,
                               const std::vector<int>& id_indices, const std::string& view_label,
                               const std::string& covariate_label, uint64_t seed,
                               bool normalize_mix = false);

/// Fraction of values inside [0, 0.1] u [0.9, 1] relative to all values.
/// Trained silhouette samples concentrate nearly all mass there; values
/// outside [0, 1] (possible for raw trajectory snapshots) count toward the
/// denominator only.
double bimodal_mass(std::span<const float> unit_range_values);

/// Maps a raw model-range snapshot to [0, 1] without clamping, for
/// histogram diagnostics.
Tensor snapshot_to_unit_range(const Tensor& model_range);

}  // namespace gaitdiff

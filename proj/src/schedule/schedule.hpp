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

#include <cmath>
#include <span>
#include <vector>

#include "core/errors.hpp"

namespace gaitdiff {

/// Variance schedule for the noising chain. All coefficient tables are
/// kept in double precision regardless of what precision the network runs
/// in. Timesteps are indexed 0..T-1 internally; a 1-based step t in the
/// usual DDPM notation corresponds to index t-1 here.
struct NoiseSchedule {
    int timesteps = 0;
    std::vector<double> beta;       // per-step variance, beta[t] in (0, 1)
    std::vector<double> alpha;      // 1 - beta[t]
    std::vector<double> alpha_bar;  // cumulative product of alpha, strictly decreasing
};

/// Linear beta schedule, inclusive of both endpoints. With T == 1 the
/// single beta equals beta_start.
NoiseSchedule make_linear_schedule(int timesteps, double beta_start, double beta_end);

/// One noising step: y_t = sqrt(alpha_t) * y_prev + sqrt(1 - alpha_t) * eps.
template <typename S>
void forward_step(std::span<const S> y_prev, int t, std::span<const S> epsilon,
                  const NoiseSchedule& sched, std::span<S> out) {
    if (t < 0 || t >= sched.timesteps) throw param_error("forward_step: t out of range");
    if (y_prev.size() != epsilon.size() || y_prev.size() != out.size())
        throw shape_error("forward_step: shape mismatch");
    const double a = std::sqrt(sched.alpha[t]);
    const double b = std::sqrt(1.0 - sched.alpha[t]);
    for (size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<S>(a * static_cast<double>(y_prev[i]) + b * static_cast<double>(epsilon[i]));
}

/// Closed-form marginal of iterating the forward step from y_0:
/// y_t = sqrt(alpha_bar_t) * y_0 + sqrt(1 - alpha_bar_t) * eps.
template <typename S>
void forward_marginal(std::span<const S> y0, int t, std::span<const S> epsilon,
                      const NoiseSchedule& sched, std::span<S> out) {
    if (t < 0 || t >= sched.timesteps) throw param_error("forward_marginal: t out of range");
    if (y0.size() != epsilon.size() || y0.size() != out.size())
        throw shape_error("forward_marginal: shape mismatch");
    const double a = std::sqrt(sched.alpha_bar[t]);
    const double b = std::sqrt(1.0 - sched.alpha_bar[t]);
    for (size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<S>(a * static_cast<double>(y0[i]) + b * static_cast<double>(epsilon[i]));
}

}  // namespace gaitdiff

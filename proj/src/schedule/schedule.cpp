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

#include "schedule/schedule.hpp"

namespace gaitdiff {

NoiseSchedule make_linear_schedule(int timesteps, double beta_start, double beta_end) {
    if (timesteps < 1) throw param_error("schedule: timesteps must be >= 1");
    if (!(beta_start > 0.0) || !(beta_start <= beta_end) || !(beta_end < 1.0))
        throw param_error("schedule: need 0 < beta_start <= beta_end < 1");

    NoiseSchedule s;
    s.timesteps = timesteps;
    s.beta.resize(timesteps);
    s.alpha.resize(timesteps);
    s.alpha_bar.resize(timesteps);

    for (int t = 0; t < timesteps; ++t) {
        s.beta[t] = timesteps == 1
                        ? beta_start
                        : beta_start + (beta_end - beta_start) * static_cast<double>(t) /
                                           static_cast<double>(timesteps - 1);
        s.alpha[t] = 1.0 - s.beta[t];
        s.alpha_bar[t] = (t == 0 ? 1.0 : s.alpha_bar[t - 1]) * s.alpha[t];
    }
    return s;
}

}  // namespace gaitdiff

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

#include "denoiser/denoiser.hpp"

namespace gaitdiff {

void DenoiserConfig::validate() const {
    if (base_dim < 1) throw param_error("config: base_dim must be >= 1");
    if (channel_mults.empty()) throw param_error("config: channel_mults must be nonempty");
    for (int m : channel_mults)
        if (m < 1) throw param_error("config: channel multipliers must be >= 1");
    if (in_channels < 1 || clip_length < 1 || frame_h < 1 || frame_w < 1)
        throw param_error("config: sizes must be >= 1");
    if (n_ids < 1 || n_views < 1 || n_covariates < 1)
        throw param_error("config: vocabulary sizes must be >= 1");
    if (attention_heads < 1 || res_blocks_per_level < 1 || norm_groups < 1)
        throw param_error("config: heads/blocks/groups must be >= 1");

    const int L = levels();
    const int factor = 1 << (L - 1);
    if (frame_h % factor != 0 || frame_w % factor != 0)
        throw param_error("config: frame size " + std::to_string(frame_h) + "x" +
                          std::to_string(frame_w) + " not divisible by 2^" + std::to_string(L - 1) +
                          " for " + std::to_string(L) + " levels");
    for (int i = 0; i < L; ++i) {
        if (dim(i) % norm_groups != 0)
            throw param_error("config: level " + std::to_string(i) + " width " +
                              std::to_string(dim(i)) + " not divisible by norm_groups " +
                              std::to_string(norm_groups));
        if (attention_at(i) && dim(i) % attention_heads != 0)
            throw param_error("config: level " + std::to_string(i) + " width " +
                              std::to_string(dim(i)) + " not divisible by attention_heads " +
                              std::to_string(attention_heads));
    }
}

}  // namespace gaitdiff

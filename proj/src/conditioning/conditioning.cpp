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

#include "conditioning/conditioning.hpp"

#include <set>

namespace gaitdiff {

IdentityVector make_identity(int index, int n_ids) {
    if (n_ids < 1) throw param_error("make_identity: n_ids must be >= 1");
    if (index < 0 || index >= n_ids)
        throw param_error("make_identity: index " + std::to_string(index) + " out of range [0, " +
                          std::to_string(n_ids) + ")");
    IdentityVector v;
    v.weights.assign(static_cast<size_t>(n_ids), 0.0f);
    v.weights[static_cast<size_t>(index)] = 1.0f;
    v.is_mixed = false;
    return v;
}

IdentityVector mix_identities(const std::vector<int>& indices, int n_ids, bool normalize) {
    if (indices.size() < 2)
        throw param_error("mix_identities: need at least 2 identities, got " +
                          std::to_string(indices.size()));
    std::set<int> seen;
    for (int i : indices) {
        if (i < 0 || i >= n_ids)
            throw param_error("mix_identities: index " + std::to_string(i) + " out of range [0, " +
                              std::to_string(n_ids) + ")");
        if (!seen.insert(i).second)
            throw param_error("mix_identities: duplicate index " + std::to_string(i));
    }
    IdentityVector v;
    v.weights.assign(static_cast<size_t>(n_ids), 0.0f);
    const float w = normalize ? 1.0f / static_cast<float>(indices.size()) : 1.0f;
    for (int i : indices) v.weights[static_cast<size_t>(i)] = w;
    v.is_mixed = true;
    return v;
}

}  // namespace gaitdiff

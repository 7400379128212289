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

#include <string>
#include <utility>
#include <vector>

#include "core/errors.hpp"

namespace gaitdiff {

enum class AugmentationMode {
    original_ids,    // synthetic samples for the existing identities
    novel_ids,       // identity-mixed synthetic identities only
    combined,        // both, in one manifest
    synthetic_only,  // original-id generation rebadged with fresh indices
};

AugmentationMode augmentation_mode_from_string(const std::string& s);
std::string to_string(AugmentationMode m);

struct AugmentationPlan {
    AugmentationMode mode = AugmentationMode::combined;
    int n_original = 0;  // 0 = every identity the checkpoint knows
    int variations_per_setting = 5;
    std::vector<std::pair<int, int>> id_mixing_pairs;  // empty = consecutive (i, i+1)
    std::vector<std::string> views, covariates;        // empty = full model vocabulary
};

/// Consecutive-pair mixing (0,1), (1,2), ..., (n-2, n-1): n_original - 1
/// novel identities, the sizing the augmentation studies use.
std::vector<std::pair<int, int>> default_mixing_pairs(int n_original);

struct PlanCardinality {
    int original_ids = 0;
    int novel_ids = 0;
    int total_ids = 0;
    int64_t sequences = 0;  // entries the plan will emit
};

/// Identity/sequence counts implied by a plan, without generating anything.
/// With default pairs, combined plans total 2*n_original - 1 identities.
PlanCardinality plan_cardinality(const AugmentationPlan& plan, int n_views, int n_covariates);

}  // namespace gaitdiff

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

#include <json.hpp>
#include <string>

#include "denoiser/denoiser.hpp"
#include "experiments/plan.hpp"
#include "trainer/trainer.hpp"

namespace gaitdiff {

/// Merged configuration tree for the toolkit. Precedence is
/// defaults < config file < explicit overrides; every layer is applied
/// with apply_config_json, which rejects unknown keys anywhere in the
/// tree. Model vocabulary sizes and the frame geometry are not part of
/// the tree: they are resolved from the dataset manifest at train time.
struct RunConfig {
    DenoiserConfig model;  // n_ids / n_views / n_covariates filled later
    TrainConfig train;     // includes the schedule parameters
    std::string data_manifest;
    AugmentationPlan augment;
};

RunConfig default_run_config();

/// Applies a (possibly partial) JSON tree onto cfg. Unknown keys raise a
/// validation error naming the offending path.
void apply_config_json(RunConfig& cfg, const nlohmann::json& j);

nlohmann::json run_config_to_json(const RunConfig& cfg);

/// Fully validates the merged tree (delegating to the member validators).
void validate_run_config(const RunConfig& cfg);

}  // namespace gaitdiff

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

#include <tuple>

#include "eval/gbs.hpp"
#include "experiments/plan.hpp"
#include "sampler/sampler.hpp"

namespace gaitdiff {

/// Generates the synthetic dataset a plan describes and writes it in the
/// standard dataset layout under out_dir (manifest + frames + a
/// provenance.json recording the plan, seed and checkpoint hash). Every
/// generation job derives its own seed from (seed, id, view, covariate,
/// variation), so outputs do not depend on job ordering.
DatasetManifest build_augmentation(const Denoiser& model, const NoiseSchedule& sched,
                                   const AugmentationPlan& plan, uint64_t seed,
                                   const std::string& out_dir,
                                   const std::string& checkpoint_hash = "");

struct SeedSweepResult {
    std::vector<uint64_t> seeds;
    std::vector<SilhouetteSequence> clips;
    // (i, j, mean absolute pixel difference) for i < j
    std::vector<std::tuple<int, int, double>> pairwise_diff;
    std::vector<double> per_seed_gbs;  // empty without a reference set
};

/// One clip per seed under a fixed bundle, with the pairwise
/// mean-absolute-difference summary; optionally scores each clip against
/// a reference embedding set (same-identity pairing).
SeedSweepResult seed_sweep(const Denoiser& model, const NoiseSchedule& sched,
                           const ConditionBundle& bundle, const std::vector<uint64_t>& seeds,
                           const std::vector<EmbeddingVector>* reference = nullptr);

enum class SplitMode {
    closed_set,  // keep a fraction of the samples of every identity
    open_set,    // keep a fraction of the identities (reindexed densely)
};

SplitMode split_mode_from_string(const std::string& s);

/// Deterministic manifest split; the subset manifest is written beside the
/// source manifest (same root, new filename) and returned validated.
DatasetManifest split_manifest(const DatasetManifest& manifest, SplitMode mode, double fraction,
                               uint64_t seed, const std::string& out_manifest_path);

/// FNV-1a content hash used in provenance records.
std::string file_hash_hex(const std::string& path);

}  // namespace gaitdiff

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

#include "trainer/trainer.hpp"

namespace gaitdiff {

// Checkpoint archive layout (uncompressed NPZ; `.bin` extension by
// convention, still readable by any numpy-compatible tool):
//   __meta__          uint8 JSON: format_version, model config, schedule
//                     parameters, label vocabularies, step counter,
//                     optimizer hyperparameters
//   param/<name>      float32 parameter tensors, stable names
//   adam/m/<name>     float32 first moments   (training checkpoints)
//   adam/v/<name>     float32 second moments
//   rng_state         uint64[4] training RNG state
inline constexpr int kCheckpointFormatVersion = 1;

nlohmann::json denoiser_config_to_json(const DenoiserConfig& cfg);
DenoiserConfig denoiser_config_from_json(const nlohmann::json& j);

void save_checkpoint(const TrainState& state, const std::string& path);

/// Restores a complete training state (model, optimizer moments, RNG,
/// step counter, schedule).
TrainState load_checkpoint(const std::string& path);

/// Loads only what generation and evaluation need (model + schedule).
struct LoadedModel {
    Denoiser model;
    NoiseSchedule schedule;
    int64_t step = 0;
};
LoadedModel load_model(const std::string& path);

}  // namespace gaitdiff

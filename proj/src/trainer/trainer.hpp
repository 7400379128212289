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

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "conditioning/conditioning.hpp"
#include "data/dataset.hpp"
#include "denoiser/denoiser.hpp"
#include "schedule/schedule.hpp"

namespace gaitdiff {

struct TrainConfig {
    double learning_rate = 1e-4;
    int batch_size = 4;
    int64_t total_steps = 100000;
    int timesteps = 100;  // diffusion steps T
    double beta_start = 1e-4;
    double beta_end = 0.02;
    uint64_t seed = 0;
    int64_t checkpoint_every = 1000;
    int clip_length = 30;
    double grad_clip_norm = 0.0;  // 0 disables clipping
    bool loop_pad = false;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;

    void validate() const;
};

/// Adam over a parameter registry, with per-parameter first/second moments.
class Adam {
  public:
    void attach(const nn::ParamRefs<float>& params);
    void update(const nn::ParamRefs<float>& params, double lr, double beta1, double beta2,
                double eps);
    int64_t updates() const { return t_; }

    // Checkpoint access.
    const std::vector<std::vector<float>>& moments_m() const { return m_; }
    const std::vector<std::vector<float>>& moments_v() const { return v_; }
    void restore(std::vector<std::vector<float>> m, std::vector<std::vector<float>> v, int64_t t);

  private:
    std::vector<std::vector<float>> m_, v_;
    int64_t t_ = 0;
};

struct LossRecord {
    int64_t step = 0;
    double loss = 0;
    double wall_time = 0;  // seconds since the unix epoch
};

struct TrainState {
    Denoiser model;
    NoiseSchedule schedule;
    TrainConfig config;
    Adam adam;
    Rng rng;
    int64_t step = 0;
    std::vector<LossRecord> history;
};

/// Builds a fresh training state (model initialized from config.seed).
TrainState make_train_state(const DenoiserConfig& model_cfg, const TrainConfig& train_cfg,
                            const std::vector<std::string>& views,
                            const std::vector<std::string>& covariates);

/// One optimization step over an explicit batch. Per sample: map to model
/// range, draw t uniform over the schedule and unit-normal noise, form y_t
/// by the closed-form marginal, add the condition input bias, predict the
/// noise and accumulate the mean-squared error. One Adam update; returns
/// the batch loss (mean over samples and elements).
double training_step(TrainState& state,
                     const std::vector<std::pair<SilhouetteSequence, ConditionBundle>>& batch);

/// Noise predictor seam for loss probes: receives the condition-biased
/// noisy sample, the timestep, the identity token, and the noise that was
/// actually added (so oracle predictors can return it exactly).
using NoisePredictor =
    std::function<Tensor(const Tensor& y_biased, int t, const Tensor& id_token, const Tensor& eps)>;

/// Evaluates the training objective over a batch without touching any
/// parameters, drawing (t, eps) from `rng` in the same order as
/// training_step. With the default predictor (the model itself) and the
/// same RNG state it reproduces training_step's loss exactly.
double probe_loss(const Denoiser& model, const NoiseSchedule& schedule, Rng& rng,
                  const std::vector<std::pair<SilhouetteSequence, ConditionBundle>>& batch,
                  const NoisePredictor& predictor = {});

/// Full training loop over a manifest with uniform (sequence, crop) batch
/// sampling. Writes `ckpt_<step>.bin` checkpoints plus a `latest` pointer
/// file and appends `loss.csv` records under run_dir. Returns the final
/// checkpoint path. Pass resume_checkpoint to continue an earlier run up
/// to config.total_steps.
std::string train(const DatasetManifest& manifest, const TrainConfig& train_cfg,
                  DenoiserConfig model_cfg, const std::string& run_dir,
                  const std::string& resume_checkpoint = "", bool quiet = false);

}  // namespace gaitdiff

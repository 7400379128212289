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

#include "trainer/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "trainer/checkpoint.hpp"

namespace fs = std::filesystem;

namespace gaitdiff {

void TrainConfig::validate() const {
    if (learning_rate <= 0) throw param_error("train: learning_rate must be positive");
    if (batch_size < 1) throw param_error("train: batch_size must be >= 1");
    if (total_steps < 0) throw param_error("train: total_steps must be >= 0");
    if (timesteps < 1) throw param_error("train: timesteps must be >= 1");
    if (checkpoint_every < 1) throw param_error("train: checkpoint_every must be >= 1");
    if (clip_length < 1) throw param_error("train: clip_length must be >= 1");
    if (grad_clip_norm < 0) throw param_error("train: grad_clip_norm must be >= 0");
}

void Adam::attach(const nn::ParamRefs<float>& params) {
    m_.clear();
    v_.clear();
    for (const auto& r : params) {
        m_.emplace_back(r.param->value.v.size(), 0.0f);
        v_.emplace_back(r.param->value.v.size(), 0.0f);
    }
    t_ = 0;
}

void Adam::restore(std::vector<std::vector<float>> m, std::vector<std::vector<float>> v, int64_t t) {
    m_ = std::move(m);
    v_ = std::move(v);
    t_ = t;
}

void Adam::update(const nn::ParamRefs<float>& params, double lr, double beta1, double beta2,
                  double eps) {
    if (m_.size() != params.size()) throw internal_error("adam: not attached to this parameter set");
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
    for (size_t i = 0; i < params.size(); ++i) {
        auto& p = params[i].param->value.v;
        auto& g = params[i].param->grad.v;
        auto& m = m_[i];
        auto& v = v_[i];
        for (size_t k = 0; k < p.size(); ++k) {
            const double gk = static_cast<double>(g[k]);
            const double mk = beta1 * static_cast<double>(m[k]) + (1.0 - beta1) * gk;
            const double vk = beta2 * static_cast<double>(v[k]) + (1.0 - beta2) * gk * gk;
            m[k] = static_cast<float>(mk);
            v[k] = static_cast<float>(vk);
            const double mhat = mk / bc1;
            const double vhat = vk / bc2;
            p[k] = static_cast<float>(static_cast<double>(p[k]) - lr * mhat / (std::sqrt(vhat) + eps));
        }
    }
}

TrainState make_train_state(const DenoiserConfig& model_cfg, const TrainConfig& train_cfg,
                            const std::vector<std::string>& views,
                            const std::vector<std::string>& covariates) {
    train_cfg.validate();
    TrainState state;
    state.config = train_cfg;
    state.model = Denoiser::build(model_cfg, views, covariates, train_cfg.seed);
    state.schedule =
        make_linear_schedule(train_cfg.timesteps, train_cfg.beta_start, train_cfg.beta_end);
    state.adam.attach(state.model.params);
    state.rng = Rng::stream(train_cfg.seed, 0x7e41ull);
    state.step = 0;
    return state;
}

namespace {

double wall_seconds() {
    return std::chrono::duration<double>(std::chrono::system_clock::now().time_since_epoch())
        .count();
}

double grad_norm(const nn::ParamRefs<float>& params) {
    double sq = 0;
    for (const auto& r : params)
        for (float g : r.param->grad.v) sq += static_cast<double>(g) * g;
    return std::sqrt(sq);
}

double param_norm(const nn::ParamRefs<float>& params) {
    double sq = 0;
    for (const auto& r : params)
        for (float p : r.param->value.v) sq += static_cast<double>(p) * p;
    return std::sqrt(sq);
}

}  // namespace

double training_step(TrainState& state,
                     const std::vector<std::pair<SilhouetteSequence, ConditionBundle>>& batch) {
    if (batch.empty()) throw param_error("training_step: empty batch");
    Denoiser& model = state.model;
    const DenoiserConfig& cfg = model.config;
    const int64_t rows = static_cast<int64_t>(cfg.clip_length) * cfg.frame_h * cfg.frame_w;
    const int64_t elems = rows * cfg.in_channels;
    const int B = static_cast<int>(batch.size());

    model.zero_grads();
    double loss_sum = 0;
    std::vector<int> ts_drawn;

    for (const auto& [seq, bundle] : batch) {
        if (seq.frames.numel() != elems)
            throw shape_error("training_step: sequence " + seq.sequence_id +
                              " does not match the model clip shape");

        Tensor y0 = seq.frames;
        y0.reshape({rows, static_cast<int64_t>(cfg.in_channels)});
        to_model_range(y0.span());

        const int t = static_cast<int>(state.rng.below(static_cast<uint64_t>(state.schedule.timesteps)));
        ts_drawn.push_back(t);
        Tensor eps(y0.shape);
        state.rng.fill_normal(eps.span());

        Tensor yt(y0.shape);
        forward_marginal<float>(y0.span(), t, eps.span(), state.schedule, yt.span());

        const auto ct = model.cond.build_condition_tensors(bundle, cfg.clip_length);
        add_inplace(yt, ct.input_bias);

        UNetT<float>::Cache cache;
        Tensor eps_hat;
        model.unet.forward(yt, t, ct.id_token, eps_hat, &cache);

        // loss_s = mean((eps_hat - eps)^2); batch loss = mean over samples.
        double sample_sq = 0;
        Tensor dout(eps_hat.shape);
        const double scale = 2.0 / (static_cast<double>(elems) * B);
        for (int64_t i = 0; i < elems; ++i) {
            const double d = static_cast<double>(eps_hat[i]) - static_cast<double>(eps[i]);
            sample_sq += d * d;
            dout[i] = static_cast<float>(d * scale);
        }
        loss_sum += sample_sq / static_cast<double>(elems);

        Tensor dx, did;
        model.unet.backward(yt, ct.id_token, dout, cache, &dx, &did);
        model.cond.backward(bundle, dx, did, cfg.clip_length);
    }

    const double loss = loss_sum / B;
    if (!std::isfinite(loss)) {
        std::string ts;
        for (int t : ts_drawn) ts += std::to_string(t) + " ";
        throw numeric_error("training aborted: non-finite loss at step " +
                            std::to_string(state.step + 1) + " (t drawn: " + ts +
                            ", parameter norm " + std::to_string(param_norm(model.params)) + ")");
    }

    if (state.config.grad_clip_norm > 0) {
        const double norm = grad_norm(model.params);
        if (norm > state.config.grad_clip_norm) {
            const float s = static_cast<float>(state.config.grad_clip_norm / norm);
            for (auto& r : model.params)
                for (auto& g : r.param->grad.v) g *= s;
        }
    }

    state.adam.update(model.params, state.config.learning_rate, state.config.adam_beta1,
                      state.config.adam_beta2, state.config.adam_eps);
    ++state.step;
    state.history.push_back({state.step, loss, wall_seconds()});
    return loss;
}

double probe_loss(const Denoiser& model, const NoiseSchedule& schedule, Rng& rng,
                  const std::vector<std::pair<SilhouetteSequence, ConditionBundle>>& batch,
                  const NoisePredictor& predictor) {
    if (batch.empty()) throw param_error("probe_loss: empty batch");
    const DenoiserConfig& cfg = model.config;
    const int64_t rows = static_cast<int64_t>(cfg.clip_length) * cfg.frame_h * cfg.frame_w;
    const int64_t elems = rows * cfg.in_channels;

    double loss_sum = 0;
    for (const auto& [seq, bundle] : batch) {
        if (seq.frames.numel() != elems)
            throw shape_error("probe_loss: sequence does not match the model clip shape");
        Tensor y0 = seq.frames;
        y0.reshape({rows, static_cast<int64_t>(cfg.in_channels)});
        to_model_range(y0.span());

        const int t = static_cast<int>(rng.below(static_cast<uint64_t>(schedule.timesteps)));
        Tensor eps(y0.shape);
        rng.fill_normal(eps.span());
        Tensor yt(y0.shape);
        forward_marginal<float>(y0.span(), t, eps.span(), schedule, yt.span());

        const auto ct = model.cond.build_condition_tensors(bundle, cfg.clip_length);
        add_inplace(yt, ct.input_bias);

        Tensor eps_hat;
        if (predictor) {
            eps_hat = predictor(yt, t, ct.id_token, eps);
        } else {
            model.unet.forward(yt, t, ct.id_token, eps_hat, nullptr);
        }
        if (eps_hat.numel() != elems) throw shape_error("probe_loss: predictor output shape");

        double sample_sq = 0;
        for (int64_t i = 0; i < elems; ++i) {
            const double d = static_cast<double>(eps_hat[i]) - static_cast<double>(eps[i]);
            sample_sq += d * d;
        }
        loss_sum += sample_sq / static_cast<double>(elems);
    }
    return loss_sum / static_cast<double>(batch.size());
}

std::string train(const DatasetManifest& manifest, const TrainConfig& train_cfg,
                  DenoiserConfig model_cfg, const std::string& run_dir,
                  const std::string& resume_checkpoint, bool quiet) {
    train_cfg.validate();
    if (manifest.entries.empty()) throw validation_error("train: dataset is empty");

    model_cfg.n_ids = manifest.n_ids;
    model_cfg.n_views = static_cast<int>(manifest.views.size());
    model_cfg.n_covariates = static_cast<int>(manifest.covariates.size());
    model_cfg.clip_length = train_cfg.clip_length;
    model_cfg.frame_h = kFrameHeight;
    model_cfg.frame_w = kFrameWidth;

    TrainState state;
    if (!resume_checkpoint.empty()) {
        state = load_checkpoint(resume_checkpoint);
        if (state.model.config.n_ids != model_cfg.n_ids ||
            state.model.cond.views != manifest.views ||
            state.model.cond.covariates != manifest.covariates)
            throw validation_error("resume: checkpoint vocabularies do not match the dataset");
        // The requested run parameters (total_steps etc.) override the
        // stored ones; the model/schedule/optimizer state carries on.
        TrainConfig merged = train_cfg;
        merged.timesteps = state.config.timesteps;
        merged.beta_start = state.config.beta_start;
        merged.beta_end = state.config.beta_end;
        state.config = merged;
    } else {
        state = make_train_state(model_cfg, train_cfg, manifest.views, manifest.covariates);
    }

    fs::create_directories(run_dir);
    const fs::path loss_path = fs::path(run_dir) / "loss.csv";
    std::ofstream loss_log;
    if (resume_checkpoint.empty()) {
        loss_log.open(loss_path, std::ios::trunc);
        loss_log << "step,loss,wall_time\n";
    } else {
        loss_log.open(loss_path, std::ios::app);
    }
    if (!loss_log) throw io_error("cannot open loss log: " + loss_path.string());

    SequenceStore store(manifest);
    auto write_ckpt = [&](int64_t step) {
        const std::string name = "ckpt_" + std::to_string(step) + ".bin";
        const fs::path path = fs::path(run_dir) / name;
        save_checkpoint(state, path.string());
        std::ofstream latest(fs::path(run_dir) / "latest", std::ios::trunc);
        latest << name << "\n";
        return path.string();
    };

    std::string last_path = write_ckpt(state.step);
    while (state.step < train_cfg.total_steps) {
        std::vector<std::pair<SilhouetteSequence, ConditionBundle>> batch;
        batch.reserve(train_cfg.batch_size);
        for (int b = 0; b < train_cfg.batch_size; ++b) {
            const auto& entry =
                manifest.entries[state.rng.below(manifest.entries.size())];
            int start = 0;
            if (entry.frame_count > train_cfg.clip_length)
                start = static_cast<int>(
                    state.rng.below(static_cast<uint64_t>(entry.frame_count - train_cfg.clip_length + 1)));
            else if (entry.frame_count < train_cfg.clip_length && train_cfg.loop_pad)
                start = static_cast<int>(state.rng.below(static_cast<uint64_t>(entry.frame_count)));
            SilhouetteSequence seq =
                store.clip(entry.sequence_id, train_cfg.clip_length, start, train_cfg.loop_pad);
            ConditionBundle bundle;
            bundle.identity = make_identity(entry.identity_index, manifest.n_ids);
            bundle.view_label = entry.view_label;
            bundle.covariate_label = entry.covariate_label;
            batch.emplace_back(std::move(seq), std::move(bundle));
        }

        const double loss = training_step(state, batch);
        const LossRecord& rec = state.history.back();
        loss_log << rec.step << "," << std::scientific << rec.loss << ","
                 << std::fixed << rec.wall_time << "\n"
                 << std::defaultfloat;
        loss_log.flush();

        if (!quiet && (state.step % 50 == 0 || state.step == train_cfg.total_steps))
            std::printf("step %lld  loss %.5f\n", static_cast<long long>(state.step), loss);

        if (state.step % train_cfg.checkpoint_every == 0 || state.step == train_cfg.total_steps)
            last_path = write_ckpt(state.step);
    }
    if (state.step % train_cfg.checkpoint_every != 0 || train_cfg.total_steps == 0)
        last_path = write_ckpt(state.step);
    return last_path;
}

}  // namespace gaitdiff

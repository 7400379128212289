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

#include <algorithm>
#include <string>
#include <vector>

#include "core/errors.hpp"
#include "nn/layers.hpp"

namespace gaitdiff {

/// Identity conditioning vector over the training vocabulary. A pure
/// identity is one-hot; a mixed identity activates several entries (by
/// default each at weight 1, matching how novel identities are produced;
/// optionally normalized to a convex combination).
struct IdentityVector {
    std::vector<float> weights;
    bool is_mixed = false;
};

IdentityVector make_identity(int index, int n_ids);

/// indices must contain >= 2 distinct valid ids.
IdentityVector mix_identities(const std::vector<int>& indices, int n_ids, bool normalize);

/// What generation is conditioned on: who walks, from where, under what
/// covariate.
struct ConditionBundle {
    IdentityVector identity;
    std::string view_label;
    std::string covariate_label;
};

/// The conditioning signals in tensor form. input_bias is added to the
/// noisy sample before every denoiser invocation; id_token is injected
/// into the network blocks.
template <typename S>
struct ConditionTensorsT {
    TensorT<S> id_token;    // (id_dim)
    TensorT<S> input_bias;  // (F * H * W, C), temporally constant
};

/// Learned conditioning encoders. These are ordinary model parameters,
/// trained jointly with the denoiser and stored in its checkpoints:
///   - per-label bias slabs for view and covariate (each label owns a
///     (H*W*C) image that is repeated across all frames),
///   - an identity embedding table (one id_dim row per identity; a mixed
///     identity token is the weighted sum of its rows).
template <typename S>
struct ConditionEncodersT {
    nn::EmbeddingT<S> view_table;  // (n_views, H*W*C)
    nn::EmbeddingT<S> cov_table;   // (n_covariates, H*W*C)
    nn::EmbeddingT<S> id_table;    // (n_ids, id_dim)
    std::vector<std::string> views, covariates;
    int64_t frame_h = 0, frame_w = 0, in_channels = 1;

    void build(const std::vector<std::string>& view_labels,
               const std::vector<std::string>& covariate_labels, int n_ids, int64_t id_dim,
               int64_t h, int64_t w, int64_t channels, Rng& rng) {
        if (view_labels.empty() || covariate_labels.empty())
            throw param_error("conditioning: empty label vocabulary");
        if (n_ids < 1) throw param_error("conditioning: n_ids must be >= 1");
        views = view_labels;
        covariates = covariate_labels;
        frame_h = h;
        frame_w = w;
        in_channels = channels;
        const int64_t slab = h * w * channels;
        view_table.build(static_cast<int64_t>(views.size()), slab, rng);
        cov_table.build(static_cast<int64_t>(covariates.size()), slab, rng);
        id_table.build(n_ids, id_dim, rng);
    }

    void collect(const std::string& prefix, nn::ParamRefs<S>& refs) {
        view_table.collect(prefix + ".view_table", refs);
        cov_table.collect(prefix + ".cov_table", refs);
        id_table.collect(prefix + ".id_table", refs);
    }

    int label_index(const std::vector<std::string>& vocab, const std::string& label,
                    const char* kind) const {
        auto it = std::find(vocab.begin(), vocab.end(), label);
        if (it == vocab.end()) throw vocab_error(std::string("unknown ") + kind + " label: " + label);
        return static_cast<int>(it - vocab.begin());
    }

    int view_index(const std::string& label) const { return label_index(views, label, "view"); }
    int covariate_index(const std::string& label) const {
        return label_index(covariates, label, "covariate");
    }

    /// Label slab repeated across clip_length frames: (F * H * W, C).
    TensorT<S> encode_view(const std::string& label, int64_t clip_length) const {
        return repeat_slab(view_table, view_index(label), clip_length);
    }
    TensorT<S> encode_covariate(const std::string& label, int64_t clip_length) const {
        return repeat_slab(cov_table, covariate_index(label), clip_length);
    }

    /// id_token plus the summed view/covariate input bias for a bundle.
    ConditionTensorsT<S> build_condition_tensors(const ConditionBundle& bundle,
                                                 int64_t clip_length) const {
        if (static_cast<int64_t>(bundle.identity.weights.size()) != id_table.count)
            throw vocab_error("identity vector length does not match the model's id vocabulary");
        ConditionTensorsT<S> out;
        id_table.forward(bundle.identity.weights, out.id_token);
        out.input_bias = encode_view(bundle.view_label, clip_length);
        TensorT<S> cov = encode_covariate(bundle.covariate_label, clip_length);
        add_inplace(out.input_bias, cov);
        return out;
    }

    /// Routes gradients of the conditioning tensors back into the tables.
    /// d_input is the loss gradient w.r.t. the biased model input; the
    /// slab gradient is its temporal sum and flows into both label rows.
    void backward(const ConditionBundle& bundle, const TensorT<S>& d_input,
                  const TensorT<S>& d_id_token, int64_t clip_length) {
        id_table.backward(bundle.identity.weights, d_id_token);

        const int64_t slab = frame_h * frame_w * in_channels;
        if (d_input.numel() != slab * clip_length) throw shape_error("conditioning backward: bad d_input");
        std::vector<S> slab_grad(static_cast<size_t>(slab), S(0));
        for (int64_t f = 0; f < clip_length; ++f) {
            const S* src = d_input.data() + f * slab;
            for (int64_t i = 0; i < slab; ++i) slab_grad[i] += src[i];
        }
        const int vi = view_index(bundle.view_label);
        const int ci = covariate_index(bundle.covariate_label);
        S* vg = view_table.table.grad.data() + static_cast<int64_t>(vi) * slab;
        S* cg = cov_table.table.grad.data() + static_cast<int64_t>(ci) * slab;
        for (int64_t i = 0; i < slab; ++i) {
            vg[i] += slab_grad[i];
            cg[i] += slab_grad[i];
        }
    }

  private:
    TensorT<S> repeat_slab(const nn::EmbeddingT<S>& table, int index, int64_t clip_length) const {
        const int64_t slab = frame_h * frame_w * in_channels;
        TensorT<S> out({clip_length * frame_h * frame_w, in_channels});
        const S* row = table.table.value.data() + static_cast<int64_t>(index) * slab;
        for (int64_t f = 0; f < clip_length; ++f)
            std::copy(row, row + slab, out.data() + f * slab);
        return out;
    }
};

}  // namespace gaitdiff
